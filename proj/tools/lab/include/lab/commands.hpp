#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lab/config.hpp"

namespace lab {

const std::vector<std::string>& command_names();

/// Files written into an output directory.  Unless commit() is called, the
/// destructor removes every file written and the directory if it was created
/// here, so a failed run leaves nothing behind.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path dir);
  ~OutputDir();
  OutputDir(const OutputDir&) = delete;
  OutputDir& operator=(const OutputDir&) = delete;

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path write(const std::string& name, const std::string& content);
  /// Registers a file that some other writer is about to create.
  std::filesystem::path reserve(const std::string& name);
  void commit() { committed_ = true; }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> files_;
  bool created_ = false;
  bool committed_ = false;
};

/// Runs `command` with `cfg`, writing into `out`.  Throws on any error.
void run_command(const std::string& command, const Config& cfg, OutputDir& out);

}  // namespace lab
