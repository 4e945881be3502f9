#pragma once

#include <string_view>

namespace infoseek {

// System prompts for the three LLM-backed roles, verbatim.
std::string_view seeker_system_prompt() noexcept;
std::string_view oracle_system_prompt() noexcept;
std::string_view pruner_system_prompt() noexcept;

// Instructs an extractor model to list candidate questions found in a reasoning trace.
std::string_view candidate_extraction_prompt() noexcept;

}  // namespace infoseek
