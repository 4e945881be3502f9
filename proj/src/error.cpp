#include "infoseek/error.hpp"

namespace infoseek {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::DuplicateCityId: return "DuplicateCityId";
    case Errc::InconsistentHierarchy: return "InconsistentHierarchy";
    case Errc::MissingField: return "MissingField";
    case Errc::NonCityId: return "NonCityId";
    case Errc::UnknownId: return "UnknownId";
    case Errc::AlreadyPruned: return "AlreadyPruned";
    case Errc::WouldEmptySpace: return "WouldEmptySpace";
    case Errc::EmptySpace: return "EmptySpace";
    case Errc::InvalidNodeId: return "InvalidNodeId";
    case Errc::InvalidPredicate: return "InvalidPredicate";
    case Errc::TargetNotActive: return "TargetNotActive";
    case Errc::ZeroCandidates: return "ZeroCandidates";
    case Errc::InvalidShrink: return "InvalidShrink";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::Transport: return "Transport";
    case Errc::ProviderError: return "ProviderError";
    case Errc::EmptyCompletion: return "EmptyCompletion";
    case Errc::MalformedResponse: return "MalformedResponse";
    case Errc::NonCityIdInResponse: return "NonCityIdInResponse";
    case Errc::AgentFailure: return "AgentFailure";
    case Errc::InvalidTarget: return "InvalidTarget";
    case Errc::FingerprintMismatch: return "FingerprintMismatch";
    case Errc::ReplayDivergence: return "ReplayDivergence";
    case Errc::MalformedTranscript: return "MalformedTranscript";
    case Errc::ExtractorFailure: return "ExtractorFailure";
    case Errc::MissingColumn: return "MissingColumn";
    case Errc::UnexpectedColumn: return "UnexpectedColumn";
    case Errc::BadRow: return "BadRow";
    case Errc::EmptyFile: return "EmptyFile";
    case Errc::MissingPopulation: return "MissingPopulation";
    case Errc::DatasetError: return "DatasetError";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace infoseek
