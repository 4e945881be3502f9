#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace infoseek {

enum class Errc {
  // taxonomy
  DuplicateCityId,
  InconsistentHierarchy,
  MissingField,
  NonCityId,
  UnknownId,
  AlreadyPruned,
  WouldEmptySpace,
  EmptySpace,
  InvalidNodeId,
  // questions
  InvalidPredicate,
  TargetNotActive,
  // metrics
  ZeroCandidates,
  InvalidShrink,
  EmptyInput,
  // llm
  Transport,
  ProviderError,
  EmptyCompletion,
  MalformedResponse,
  NonCityIdInResponse,
  // agents / engine
  AgentFailure,
  InvalidTarget,
  FingerprintMismatch,
  ReplayDivergence,
  MalformedTranscript,
  // trace analysis
  ExtractorFailure,
  // dataset / config
  MissingColumn,
  UnexpectedColumn,
  BadRow,
  EmptyFile,
  MissingPopulation,
  DatasetError,
  ConfigError,
  IoError,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace infoseek
