#pragma once

#include <stdexcept>
#include <string>

namespace hitcast {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// audio / DSP
struct FormatError : Error { using Error::Error; };
struct UnsupportedEncodingError : Error { using Error::Error; };
struct EmptyAudioError : Error { using Error::Error; };
struct TooShortError : Error { using Error::Error; };
struct InvalidSizeError : Error { using Error::Error; };
struct DegenerateFilterbankError : Error { using Error::Error; };

// tensors / network
struct ShapeError : Error { using Error::Error; };
struct StateError : Error { using Error::Error; };

// data loading
struct SchemaError : Error { using Error::Error; };
struct DuplicateIdError : Error { using Error::Error; };
struct CsvParseError : Error { using Error::Error; };
struct SplitError : Error { using Error::Error; };
struct DegenerateFeatureError : Error { using Error::Error; };

// configuration / orchestration
struct ConfigError : Error { using Error::Error; };
struct NumericError : Error { using Error::Error; };
struct InvalidInputError : Error { using Error::Error; };
struct UndefinedCorrelationError : Error { using Error::Error; };
struct VersionError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace hitcast
