#include "gpdepth/cli.hpp"

int main(int argc, char** argv) { return gpdepth::cli::cli_main(argc, argv); }
