#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace riskmap {

// CSV / input parsing failure. Carries the 1-based line number (0 when the
// failure is not tied to a specific line, e.g. a bad header).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message
                                    : message),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Optimization produced a non-finite cost.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int iteration, double learning_rate)
      : std::runtime_error("KL cost diverged to non-finite at iteration " +
                           std::to_string(iteration) + " (learning rate " +
                           std::to_string(learning_rate) + ")"),
        iteration_(iteration),
        learning_rate_(learning_rate) {}

  int iteration() const { return iteration_; }
  double learning_rate() const { return learning_rate_; }

 private:
  int iteration_;
  double learning_rate_;
};

}  // namespace riskmap
