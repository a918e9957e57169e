#pragma once

#include <stdexcept>
#include <string>

namespace pipegen {

// Every failure surfaced by the library carries one of these codes so that
// callers (and tests) can distinguish error classes without parsing messages.
enum class ErrorCode {
  BadMagic,
  UnsupportedVersion,
  UnknownTypeCode,
  UnknownFormatCode,
  UnknownCompressionCode,
  UnknownFrameType,
  TruncatedInput,
  SchemaTooWide,
  FieldTooLong,
  InvalidSchema,
  TypeMismatch,
  RleRequiresColumn,
  CorruptPayload,
  FormatError,
  NonNumericText,
  RowBeforeHeader,
  BitmapMismatch,
  MalformedTarget,
  MalformedRequest,
  DuplicateRegistration,
  LookupTimeout,
  UnsupportedConfiguration,
  ConnectionClosed,
  IoError,
  VerificationFailure,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace pipegen
