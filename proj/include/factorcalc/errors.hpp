#pragma once

#include <stdexcept>
#include <string>

namespace factorcalc {

enum class ErrorKind {
    IllFormed,            // structural invariant violated
    UndefinedFdim,        // free dimension requested outside its domain
    UnsupportedCase,      // input outside the calculus (e.g. solved r < 1)
    NotAFactor,           // rescaling or anchoring a non-factor
    UnrealizableScale,    // matrix rescale at a trace that is not k/n
    PreconditionViolated, // trade with negative resulting tail
    NotLicensed,          // stable absorption without a licensing hypothesis
    MalformedCertificate, // replay input does not parse or apply
    Internal,             // engine bug guard
};

inline const char *error_kind_name(ErrorKind k) {
    switch (k) {
    case ErrorKind::IllFormed: return "ill-formed";
    case ErrorKind::UndefinedFdim: return "undefined-fdim";
    case ErrorKind::UnsupportedCase: return "unsupported-case";
    case ErrorKind::NotAFactor: return "not-a-factor";
    case ErrorKind::UnrealizableScale: return "unrealizable-scale";
    case ErrorKind::PreconditionViolated: return "precondition-violated";
    case ErrorKind::NotLicensed: return "not-licensed";
    case ErrorKind::MalformedCertificate: return "malformed-certificate";
    case ErrorKind::Internal: return "internal";
    }
    return "unknown";
}

class EngineError : public std::runtime_error {
  public:
    EngineError(ErrorKind kind, const std::string &msg)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + msg), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

} // namespace factorcalc
