#pragma once

#include <optional>
#include <string_view>

#include "infoseek/questions.hpp"
#include "infoseek/taxonomy.hpp"

namespace infoseek {

// Maps a free-text yes/no question onto a Predicate using the names known to
// the graph. Understands the shapes produced by Predicate::render() and close
// variants ("Is it in Asia?", "Is the target located in Japan or India?",
// "Is the target city Tokyo?"). Returns nullopt for anything else, including
// questions about facts the taxonomy does not record.
std::optional<Predicate> parse_question(std::string_view text, const HypothesisGraph& graph);

}  // namespace infoseek
