#pragma once

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "gpdepth/core.hpp"
#include "gpdepth/io.hpp"

namespace gpdepth {

/// Pose of a rendered view relative to the cloud it was rendered from. The
/// shift is stored as a multiple of the cloud's nearest depth so the record
/// is independent of the cloud's overall scale.
struct ViewRecord {
  double theta = 0.0;     // radians
  double t_factor = 0.0;  // t / min_z
};

/// 64-bit FNV-1a over the image dimensions and its 8-bit quantized pixels.
/// Used as the render id and as the lookup key of directory providers.
inline std::uint64_t image_key(const Image& img) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto eat = [&](std::uint8_t byte) {
    h ^= byte;
    h *= 0x100000001b3ull;
  };
  for (int shift = 0; shift < 32; shift += 8) {
    eat(static_cast<std::uint8_t>(static_cast<std::uint32_t>(img.width) >> shift));
    eat(static_cast<std::uint8_t>(static_cast<std::uint32_t>(img.height) >> shift));
  }
  for (double v : img.rgb) eat(io::quantize(v));
  return h;
}

inline std::string key_hex(std::uint64_t key) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(key));
  return buf;
}

/// Source of depth for a rendered image: a network in practice, a file
/// lookup, a subprocess, or an analytic oracle here.
class DepthProvider {
 public:
  virtual ~DepthProvider() = default;

  virtual DepthMap predict_depth(const Image& image) = 0;

  /// Side channel: tells the provider which view produced the image with the
  /// given render id. Providers that infer depth from pixels alone ignore it.
  virtual void annotate(std::uint64_t /*render_id*/, const ViewRecord& /*view*/) {}
};

namespace detail {

inline void check_provider_output(const DepthMap& d, const Image& image) {
  if (d.width != image.width || d.height != image.height)
    throw ProviderError("provider returned a depth map of the wrong size");
  d.validate();
}

}  // namespace detail

/// Precomputed maps stored as <dir>/<image_key hex>.pfm.
class DirectoryProvider final : public DepthProvider {
 public:
  explicit DirectoryProvider(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!std::filesystem::is_directory(dir_)) throw DataError("provider directory not found: " + dir_.string());
  }

  std::filesystem::path path_for(const Image& image) const { return dir_ / (key_hex(image_key(image)) + ".pfm"); }

  DepthMap predict_depth(const Image& image) override {
    const auto path = path_for(image);
    if (!std::filesystem::exists(path)) throw ProviderError("no precomputed depth for " + path.string());
    DepthMap d;
    try {
      d = io::read_depth(path);
    } catch (const DataError& e) {
      throw ProviderError(e.what());
    }
    detail::check_provider_output(d, image);
    return d;
  }

 private:
  std::filesystem::path dir_;
};

/// Runs `<argv...> <input.png> <output.pfm>`; a nonzero exit status is a
/// provider failure. Calls on one instance are serialized.
class CommandProvider final : public DepthProvider {
 public:
  explicit CommandProvider(std::vector<std::string> argv) : argv_(std::move(argv)) {
    if (argv_.empty()) throw DomainError("command provider needs a command");
  }

  /// Whitespace-separated command line; no quoting.
  static std::vector<std::string> split_command(const std::string& cmd) {
    std::istringstream ss(cmd);
    std::vector<std::string> argv;
    for (std::string tok; ss >> tok;) argv.push_back(tok);
    return argv;
  }

  DepthMap predict_depth(const Image& image) override {
    std::lock_guard lock(mutex_);
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() /
                         ("gpdepth-" + std::to_string(::getpid()) + "-" + std::to_string(calls_++));
    fs::create_directories(dir);
    const fs::path in = dir / "input.png";
    const fs::path out = dir / "output.pfm";
    struct Cleanup {
      fs::path p;
      ~Cleanup() {
        std::error_code ec;
        fs::remove_all(p, ec);
      }
    } cleanup{dir};

    io::write_image(in, image);
    const int status = run({in.string(), out.string()});
    if (status != 0) throw ProviderError("depth command exited with status " + std::to_string(status));
    DepthMap d;
    try {
      d = io::read_depth(out);
    } catch (const DataError& e) {
      throw ProviderError(std::string("depth command output unreadable: ") + e.what());
    }
    detail::check_provider_output(d, image);
    return d;
  }

 private:
  int run(const std::vector<std::string>& extra) const {
    std::vector<std::string> args = argv_;
    args.insert(args.end(), extra.begin(), extra.end());
    std::vector<char*> cargs;
    for (auto& a : args) cargs.push_back(a.data());
    cargs.push_back(nullptr);

    const pid_t pid = ::fork();
    if (pid < 0) throw ProviderError("fork failed");
    if (pid == 0) {
      ::execvp(cargs[0], cargs.data());
      ::_exit(127);
    }
    int status = 0;
    if (::waitpid(pid, &status, 0) < 0) throw ProviderError("waitpid failed");
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return 128;
  }

  std::vector<std::string> argv_;
  std::mutex mutex_;
  std::uint64_t calls_ = 0;
};

/// Thread-safe render id -> view registry backing the oracle side channel.
class ViewRegistry {
 public:
  void put(std::uint64_t id, const ViewRecord& v) {
    std::unique_lock lock(mutex_);
    views_[id] = v;
  }

  std::optional<ViewRecord> get(std::uint64_t id) const {
    std::shared_lock lock(mutex_);
    auto it = views_.find(id);
    if (it == views_.end()) return std::nullopt;
    return it->second;
  }

 private:
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::uint64_t, ViewRecord> views_;
};

}  // namespace gpdepth
