#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace alarmtop {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedRow : public Error {
 public:
  MalformedRow(std::size_t line, const std::string& why)
      : Error("line " + std::to_string(line) + ": " + why), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class UnknownMsgType : public Error {
 public:
  UnknownMsgType(std::size_t line, const std::string& value)
      : Error("line " + std::to_string(line) + ": unknown msg_type '" + value +
              "'"),
        line_(line),
        value_(value) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& value() const noexcept { return value_; }

 private:
  std::size_t line_;
  std::string value_;
};

class EmptyLog : public Error {
 public:
  EmptyLog() : Error("alarm log contains no events") {}
};

class EmptyDataset : public Error {
 public:
  EmptyDataset() : Error("dataset contains no traces") {}
};

class MissingTimestamps : public Error {
 public:
  explicit MissingTimestamps(const std::string& case_id)
      : Error("trace '" + case_id + "' carries no timestamps") {}
};

class TooFewTraces : public Error {
 public:
  TooFewTraces(std::size_t have, std::size_t need)
      : Error("dataset has " + std::to_string(have) + " traces, need at least " +
              std::to_string(need)) {}
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, const std::string& why)
      : Error("syntax error at " + std::to_string(position) + ": " + why),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class ArityError : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  explicit BudgetExceeded(std::size_t budget)
      : Error("enumeration exceeded budget of " + std::to_string(budget)) {}
};

class NotEnabled : public Error {
 public:
  explicit NotEnabled(const std::string& transition)
      : Error("transition " + transition + " is not enabled") {}
};

class FinalMarkingUnreachable : public Error {
 public:
  FinalMarkingUnreachable() : Error("final marking is unreachable") {}
};

class StateBudgetExceeded : public Error {
 public:
  explicit StateBudgetExceeded(std::size_t budget)
      : Error("state space exceeded budget of " + std::to_string(budget) +
              " states") {}
};

}  // namespace alarmtop
