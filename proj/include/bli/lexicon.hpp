// Bilingual dictionaries: MUSE-style text files of "source target" pairs,
// used both as training supervision and as evaluation gold.
#pragma once

#include "bli/common.hpp"
#include "bli/embeddings.hpp"

#include <map>
#include <set>
#include <string>

namespace bli {

struct DictReport {
    std::size_t lines_seen = 0;
    std::size_t skipped_unparseable = 0;
    std::size_t merged_duplicates = 0;  // exact duplicate pairs
};

struct Lexicon {
    // Ordered map so iteration (and everything derived from it) is stable.
    std::map<std::string, std::set<std::string>> entries;
    std::string source_lang;
    std::string target_lang;

    std::size_t size() const { return entries.size(); }
    bool contains(const std::string& source) const { return entries.count(source) > 0; }
    const std::set<std::string>* find(const std::string& source) const;
    void add(const std::string& source, const std::string& target);
};

// One whitespace-separated "source target" pair per line; duplicates merge.
// Lines with any other token count are skipped and counted. Throws
// InputError when the file is missing or holds no usable pair.
Lexicon load_dictionary(const std::string& path, DictReport* report = nullptr);

void save_dictionary(const Lexicon& lex, const std::string& path);

struct SplitReport {
    int dropped_missing_vocab = 0;  // keys absent from the embedding vocabulary
};

// Partition by source-word frequency rank (embedding row order): the first
// train_n keys found in the vocabulary go to train, the next cv_n to cv.
std::pair<Lexicon, Lexicon> split_dictionary(const Lexicon& lex, const EmbeddingSpace& space,
                                             int train_n, int cv_n,
                                             SplitReport* report = nullptr);

}  // namespace bli
