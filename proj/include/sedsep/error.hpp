#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sedsep {

// Every failure raised by the toolkit carries a stable machine-readable code
// (e.g. "MalformedWav") in addition to a human-readable message. The CLI
// prints these as `error[CODE]: message`.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

namespace errc {
inline constexpr std::string_view kMalformedWav = "MalformedWav";
inline constexpr std::string_view kUnsupportedFormat = "UnsupportedFormat";
inline constexpr std::string_view kIoFailure = "IoFailure";
inline constexpr std::string_view kRateMismatch = "RateMismatch";
inline constexpr std::string_view kLengthMismatch = "LengthMismatch";
inline constexpr std::string_view kBadConfig = "BadConfig";
inline constexpr std::string_view kShapeMismatch = "ShapeMismatch";
inline constexpr std::string_view kBadWeights = "BadWeights";
inline constexpr std::string_view kUnknownGroup = "UnknownGroup";
inline constexpr std::string_view kMalformedManifest = "MalformedManifest";
inline constexpr std::string_view kMissingFile = "MissingFile";
inline constexpr std::string_view kZeroReference = "ZeroReference";
inline constexpr std::string_view kZeroMixture = "ZeroMixture";
inline constexpr std::string_view kGroupSizeOverflow = "GroupSizeOverflow";
inline constexpr std::string_view kEmptyInput = "EmptyInput";
inline constexpr std::string_view kBankExhausted = "BankExhausted";
inline constexpr std::string_view kBadScheme = "BadScheme";
inline constexpr std::string_view kTooManyEvents = "TooManyEvents";
inline constexpr std::string_view kBadThreshold = "BadThreshold";
inline constexpr std::string_view kUnknownClass = "UnknownClass";
inline constexpr std::string_view kBadCurve = "BadCurve";
inline constexpr std::string_view kBadP = "BadP";
inline constexpr std::string_view kBadQ = "BadQ";
inline constexpr std::string_view kParseError = "ParseError";
inline constexpr std::string_view kUsage = "Usage";
}  // namespace errc

[[noreturn]] inline void raise(std::string_view code, const std::string& message) {
  throw Error(std::string(code), message);
}

}  // namespace sedsep
