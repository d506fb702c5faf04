#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace irdecide::cli {

// Stable process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitReject = 1;
inline constexpr int kExitError = 2;

inline constexpr const char* kConfigEnv = "IRDECIDE_CONFIG";

/// Parses and runs one command line. Human-readable output goes to `out`,
/// diagnostics to `err`; machine-readable output only to --out files.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

/// HTTP server for the what-if UI: `/bundle.json` plus static UI files.
class BundleServer {
 public:
  /// Throws InputError when the bundle cannot be read or parsed.
  BundleServer(const std::filesystem::path& bundle,
               std::optional<std::filesystem::path> ui_dir);
  ~BundleServer();

  /// Binds to `port` (0 picks a free one) and returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace irdecide::cli
