#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace krail {

enum class ErrorCode {
  // idtable
  MalformedPifCode,
  MalformedRate,
  RateOutOfRange,
  FormatError,
  FieldError,
  DuplicateEntryId,
  TableMismatch,
  // llm gateway
  ProviderUnavailable,
  ProviderRefusal,
  FixtureMiss,
  // agents / attributes
  MissingSection,
  EmptySection,
  MissingDimension,
  NoValidCandidate,
  // resolver / session
  EmptyTable,
  InvalidCase,
  IllegalTransition,
  MalformedEdit,
  UnknownSession,
  // statistics
  EmptyInput,
  InsufficientData,
  InvalidArgument,
};

std::string_view error_code_name(ErrorCode code) noexcept;

/// Single exception type for the library. `subject` names the offending item
/// (a section, a dimension, an agent); `raw_text` keeps unparsed model output
/// around so a reviewer can see what went wrong.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string subject = {},
        std::string raw_text = {})
      : std::runtime_error(message),
        code_(code),
        subject_(std::move(subject)),
        raw_text_(std::move(raw_text)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& subject() const noexcept { return subject_; }
  const std::string& raw_text() const noexcept { return raw_text_; }

  // Pipeline stage or agent the error surfaced in, if any.
  const std::string& stage() const noexcept { return stage_; }
  Error& with_stage(std::string stage) {
    stage_ = std::move(stage);
    return *this;
  }

 private:
  ErrorCode code_;
  std::string subject_;
  std::string raw_text_;
  std::string stage_;
};

}  // namespace krail
