#include "bli/lexicon.hpp"

#include <fstream>
#include <sstream>

namespace bli {

const std::set<std::string>* Lexicon::find(const std::string& source) const {
    auto it = entries.find(source);
    return it == entries.end() ? nullptr : &it->second;
}

void Lexicon::add(const std::string& source, const std::string& target) {
    if (source.empty() || target.empty()) {
        throw InputError("lexicon entries must have non-empty tokens");
    }
    entries[source].insert(target);
}

Lexicon load_dictionary(const std::string& path, DictReport* report) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open dictionary: " + path);
    Lexicon lex;
    DictReport rep;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++rep.lines_seen;
        std::istringstream ss(line);
        std::string src, tgt, extra;
        if (!(ss >> src >> tgt) || (ss >> extra)) {
            ++rep.skipped_unparseable;
            continue;
        }
        auto& set = lex.entries[src];
        if (!set.insert(tgt).second) ++rep.merged_duplicates;
    }
    if (lex.entries.empty()) throw InputError("dictionary holds no usable pair: " + path);
    if (report) *report = rep;
    return lex;
}

void save_dictionary(const Lexicon& lex, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write dictionary: " + path);
    for (const auto& [src, targets] : lex.entries) {
        for (const auto& tgt : targets) out << src << ' ' << tgt << '\n';
    }
}

std::pair<Lexicon, Lexicon> split_dictionary(const Lexicon& lex, const EmbeddingSpace& space,
                                             int train_n, int cv_n, SplitReport* report) {
    if (train_n < 0 || cv_n < 0) throw InputError("split sizes must be non-negative");
    SplitReport rep;
    for (const auto& [src, targets] : lex.entries) {
        (void)targets;
        if (!space.lookup(src)) ++rep.dropped_missing_vocab;
    }

    Lexicon train, cv;
    train.source_lang = cv.source_lang = lex.source_lang;
    train.target_lang = cv.target_lang = lex.target_lang;

    int taken = 0;
    for (int row = 0; row < space.size() && taken < train_n + cv_n; ++row) {
        const auto* targets = lex.find(space.words[row]);
        if (!targets) continue;
        if (taken < train_n) {
            train.entries[space.words[row]] = *targets;
        } else {
            cv.entries[space.words[row]] = *targets;
        }
        ++taken;
    }
    if (report) *report = rep;
    return {std::move(train), std::move(cv)};
}

}  // namespace bli
