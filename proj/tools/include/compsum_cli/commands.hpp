#pragma once

#include <cstdint>
#include <fstream>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "compsum_cli/config.hpp"

namespace compsum::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitViolation = 2;

struct GlobalOptions {
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

const std::vector<std::string>& command_names();
const std::vector<std::string>& verify_suites();
// Keys accepted by a command; verify needs the suite name.
std::vector<KeyInfo> command_keys(const std::string& command, const std::string& suite = {});

// Files are written to "<path>.partial" and renamed on commit; uncommitted
// temporaries are removed on destruction.
class AtomicOutputs {
 public:
  AtomicOutputs() = default;
  AtomicOutputs(const AtomicOutputs&) = delete;
  AtomicOutputs& operator=(const AtomicOutputs&) = delete;
  ~AtomicOutputs();

  std::ostream& open(const std::string& path);
  void commit();

 private:
  struct Item {
    std::string path;
    std::string temp;
    std::unique_ptr<std::ofstream> stream;
  };
  std::vector<Item> items_;
  bool committed_ = false;
};

int cmd_transform_table(const Config& cfg, const GlobalOptions& opts, std::ostream& log);
int cmd_verify(const std::string& suite, const Config& cfg, const GlobalOptions& opts,
               std::ostream& log);
int cmd_gaps(const Config& cfg, const GlobalOptions& opts, std::ostream& log);
int cmd_train(const Config& cfg, const GlobalOptions& opts, std::ostream& log);
int cmd_evaluate(const Config& cfg, const GlobalOptions& opts, std::ostream& log);

// Full command line: parses flags, loads and checks the config, dispatches.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace compsum::cli
