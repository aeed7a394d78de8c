#include "bli/relevance.hpp"

#include <algorithm>
#include <numeric>

namespace bli {

std::string relevance_name(RelevanceMode m) {
    switch (m) {
        case RelevanceMode::binary: return "binary";
        case RelevanceMode::semi_binary: return "semi_binary";
        case RelevanceMode::continuous_intra: return "continuous_intra";
    }
    return "semi_binary";
}

RelevanceMode relevance_from_name(const std::string& name) {
    if (name == "binary") return RelevanceMode::binary;
    if (name == "semi_binary") return RelevanceMode::semi_binary;
    if (name == "continuous_intra") return RelevanceMode::continuous_intra;
    throw InputError("unknown relevance mode: " + name);
}

std::vector<int> assign_relevance(const CandidateList& list, const Lexicon& gold,
                                  RelevanceMode mode, const EmbeddingSpace* target) {
    const auto* translations = gold.find(list.source_word);
    if (!translations) {
        throw InputError("query word absent from the gold dictionary: " + list.source_word);
    }
    const int q = static_cast<int>(list.candidates.size());
    std::vector<int> labels(static_cast<std::size_t>(q), 0);

    auto is_gold = [&](int c) {
        return translations->count(list.candidates[static_cast<std::size_t>(c)].token) > 0;
    };

    switch (mode) {
        case RelevanceMode::binary:
            for (int c = 0; c < q; ++c) labels[static_cast<std::size_t>(c)] = is_gold(c) ? 1 : 0;
            break;
        case RelevanceMode::semi_binary:
            for (int c = 0; c < q; ++c) labels[static_cast<std::size_t>(c)] = is_gold(c) ? 2 : 1;
            break;
        case RelevanceMode::continuous_intra: {
            if (!target) {
                throw InputError("continuous_intra relevance needs the target space");
            }
            // Anchor on the first gold translation present in the vocabulary.
            int anchor_row = -1;
            for (const auto& t : *translations) {
                if (auto row = target->lookup(t)) {
                    anchor_row = *row;
                    break;
                }
            }
            if (anchor_row < 0) {
                // No gold vector to measure against; grade everything lowest
                // except gold tokens (which cannot be present either).
                std::fill(labels.begin(), labels.end(), 0);
                break;
            }
            const Vector anchor = target->vectors.row(anchor_row).transpose();
            const double anorm = anchor.norm();
            std::vector<double> sims(static_cast<std::size_t>(q), 0.0);
            for (int c = 0; c < q; ++c) {
                const Vector y =
                    target->vectors.row(list.candidates[static_cast<std::size_t>(c)].target_row).transpose();
                const double ynorm = y.norm();
                sims[static_cast<std::size_t>(c)] =
                    (anorm == 0.0 || ynorm == 0.0) ? 0.0 : anchor.dot(y) / (anorm * ynorm);
            }
            std::vector<int> order(static_cast<std::size_t>(q));
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                if (sims[static_cast<std::size_t>(a)] != sims[static_cast<std::size_t>(b)]) {
                    return sims[static_cast<std::size_t>(a)] > sims[static_cast<std::size_t>(b)];
                }
                return list.candidates[static_cast<std::size_t>(a)].target_row <
                       list.candidates[static_cast<std::size_t>(b)].target_row;
            });
            for (int rank = 0; rank < q; ++rank) {
                labels[static_cast<std::size_t>(order[static_cast<std::size_t>(rank)])] = q - 1 - rank;
            }
            for (int c = 0; c < q; ++c) {
                if (is_gold(c)) labels[static_cast<std::size_t>(c)] = q - 1;
            }
            break;
        }
    }
    return labels;
}

}  // namespace bli
