#ifndef ADENET_CORE_ERROR_HPP
#define ADENET_CORE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace adenet {

enum class ErrorKind {
  kIo,
  kFormat,       // malformed container / header
  kUnsupported,  // recognized but unsupported encoding
  kLength,
  kShape,
  kAlignment,
  kConfig,
  kDegenerate,  // zero-power signal, all-zero reference, ...
  kMetric,      // undefined metric (single-class AP/AUC)
  kTrain,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline void check(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) throw Error(kind, msg);
}

}  // namespace adenet

#endif  // ADENET_CORE_ERROR_HPP
