#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tdm {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Dimension errors.
class DuplicateKeyError : public Error { public: using Error::Error; };
class TypeMismatchError : public Error { public: using Error::Error; };
class KeyNotFoundError : public Error { public: using Error::Error; };
class IndexOutOfRangeError : public Error { public: using Error::Error; };
class NullAlreadyPresentError : public Error { public: using Error::Error; };

// Tensor / algebra errors.
class DuplicateDimensionNameError : public Error { public: using Error::Error; };
class ModeOutOfRangeError : public Error { public: using Error::Error; };
class NonNumericValueTypeError : public Error { public: using Error::Error; };
class ShapeMismatchError : public Error { public: using Error::Error; };
class EmptyInputError : public Error { public: using Error::Error; };

// Query errors.
class UnknownDimensionError : public Error { public: using Error::Error; };

// Decomposition errors.
class RankOutOfRangeError : public Error { public: using Error::Error; };

// Polystore errors.
class AdapterFailureError : public Error { public: using Error::Error; };
class ArityMismatchError : public Error { public: using Error::Error; };
class MergeConflictError : public Error { public: using Error::Error; };
class DuplicateAdapterIdError : public Error { public: using Error::Error; };
class ConfigInvalidError : public Error { public: using Error::Error; };
class SchemaError : public Error { public: using Error::Error; };

// Analysis errors.
class SeriesTooShortError : public Error { public: using Error::Error; };
class KTooLargeError : public Error { public: using Error::Error; };
class WindowNotMultipleError : public Error { public: using Error::Error; };

// File / text interfaces.
class IoError : public Error { public: using Error::Error; };

/// Query-text parse failure; carries the byte offset of the offending token.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error(what + " (at position " + std::to_string(position) + ")"),
          position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

}  // namespace tdm
