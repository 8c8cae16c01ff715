#pragma once

#include <stdexcept>
#include <string>

namespace sltrace {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// problem validation
class OrderingError : public Error { public: using Error::Error; };
class ZeroScalarError : public Error { public: using Error::Error; };
class NonFiniteError : public Error { public: using Error::Error; };
class PieceDomainError : public Error { public: using Error::Error; };
class DomainError : public Error { public: using Error::Error; };

// shooting
class ToleranceFailure : public Error { public: using Error::Error; };
class OverflowGuard : public Error { public: using Error::Error; };
class PositionError : public Error { public: using Error::Error; };

// asymptotics
class SmallSError : public Error { public: using Error::Error; };
class IndexError : public Error { public: using Error::Error; };

// spectrum
class NoSignChange : public Error { public: using Error::Error; };
class BudgetExceeded : public Error { public: using Error::Error; };
class CertificationFailure : public Error { public: using Error::Error; };

// trace
class IndexGap : public Error { public: using Error::Error; };
class FitFailure : public Error { public: using Error::Error; };

// configuration files and command line
class ConfigError : public Error { public: using Error::Error; };

} // namespace sltrace
