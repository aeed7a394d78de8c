// Relevance labeling of candidate lists against a gold dictionary. Part of
// the ranking component; lives in its own header to keep the loss/metric
// code free of dictionary types.
#pragma once

#include "bli/lexicon.hpp"
#include "bli/retrieval.hpp"

#include <string>
#include <vector>

namespace bli {

enum class RelevanceMode { binary, semi_binary, continuous_intra };

std::string relevance_name(RelevanceMode m);
RelevanceMode relevance_from_name(const std::string& name);

// binary: gold translations get 1, everything else 0.
// semi_binary: gold translations get 2, everything else 1.
// continuous_intra: candidates ranked by cosine to the gold translation
// vector and graded q-1 (closest) down to 0, with every gold translation
// forced to the top grade. Needs the target space for the vectors.
// Throws InputError when the query word is absent from the gold lexicon.
std::vector<int> assign_relevance(const CandidateList& list, const Lexicon& gold,
                                  RelevanceMode mode,
                                  const EmbeddingSpace* target = nullptr);

}  // namespace bli
