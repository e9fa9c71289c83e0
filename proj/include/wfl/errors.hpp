#pragma once

#include <stdexcept>
#include <string>

namespace wfl {

/// Base class for every error this library throws.
struct Error : std::runtime_error {
    explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

// Value / configuration errors.
struct ConfigMismatch : Error { using Error::Error; };
struct OutOfRange : Error { using Error::Error; };
struct NonPositiveWeight : Error { using Error::Error; };
struct EmptyVector : Error { using Error::Error; };
struct MissingComponent : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct ClientSetMismatch : Error { using Error::Error; };
struct ZeroTotalWeight : Error { using Error::Error; };
struct InsufficientTrials : Error { using Error::Error; };

// Wire / transport errors.
struct DecodeError : Error { using Error::Error; };
struct PayloadTooLarge : Error { using Error::Error; };
struct TimeoutError : Error { using Error::Error; };
struct ChannelClosed : Error { using Error::Error; };
struct SessionMismatch : Error { using Error::Error; };

// Beaver dealer errors.
struct DealerUnavailable : Error { using Error::Error; };
struct TripleReuse : Error { using Error::Error; };

} // namespace wfl
