#ifndef NNSTOKES_ERROR_HPP
#define NNSTOKES_ERROR_HPP

#include <stdexcept>
#include <string>

namespace nnstokes {

/// Invalid model, grid or study parameters.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A linear or nonlinear solve that could not produce a usable answer.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range run configuration; `key_path` locates the entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key_path, const std::string& what)
      : std::runtime_error(key_path.empty() ? what : key_path + ": " + what),
        key_path_(std::move(key_path)) {}

  const std::string& key_path() const { return key_path_; }

 private:
  std::string key_path_;
};

}  // namespace nnstokes

#endif  // NNSTOKES_ERROR_HPP
