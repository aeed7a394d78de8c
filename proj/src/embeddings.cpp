#include "bli/embeddings.hpp"

#include <zlib.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace bli {

std::string norm_mode_name(NormMode m) {
    switch (m) {
        case NormMode::raw: return "raw";
        case NormMode::l2: return "l2";
        case NormMode::center_l2: return "center_l2";
    }
    return "raw";
}

std::optional<int> EmbeddingSpace::lookup(const std::string& token) const {
    auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::vector<int> EmbeddingSpace::zero_rows() const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i) {
        if (vectors.row(i).norm() == 0.0) out.push_back(i);
    }
    return out;
}

void EmbeddingSpace::rebuild_index() {
    index_.clear();
    index_.reserve(words.size());
    for (int i = 0; i < size(); ++i) index_.emplace(words[i], i);
}

namespace {

// Line source over a plain or gzip-compressed file.
class LineReader {
public:
    explicit LineReader(const std::string& path) {
        gzipped_ = path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
        if (gzipped_) {
            gz_ = gzopen(path.c_str(), "rb");
            if (!gz_) throw InputError("cannot open embedding file: " + path);
        } else {
            stream_.open(path);
            if (!stream_) throw InputError("cannot open embedding file: " + path);
        }
    }
    ~LineReader() {
        if (gz_) gzclose(gz_);
    }
    LineReader(const LineReader&) = delete;
    LineReader& operator=(const LineReader&) = delete;

    bool next(std::string& line) {
        if (!gzipped_) return static_cast<bool>(std::getline(stream_, line));
        line.clear();
        char buf[65536];
        for (;;) {
            if (gzgets(gz_, buf, sizeof(buf)) == nullptr) return !line.empty();
            line += buf;
            if (!line.empty() && line.back() == '\n') {
                line.pop_back();
                return true;
            }
        }
    }

private:
    bool gzipped_ = false;
    gzFile gz_ = nullptr;
    std::ifstream stream_;
};

bool parse_double(const char* begin, const char* end, double& out) {
    auto [p, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && p == end;
}

}  // namespace

EmbeddingSpace load_embeddings(const std::string& path, std::size_t max_vocab,
                               const std::string& lang_tag, LoadReport* report) {
    if (max_vocab < 1) throw InputError("max_vocab must be >= 1");
    LineReader reader(path);

    std::string line;
    if (!reader.next(line)) throw InputError("empty embedding file: " + path);
    std::size_t header_n = 0, header_d = 0;
    {
        const char* b = line.c_str();
        const char* e = b + line.size();
        const char* sp = b;
        while (sp < e && *sp != ' ') ++sp;
        auto r1 = std::from_chars(b, sp, header_n);
        if (r1.ec != std::errc() || r1.ptr != sp || sp == e) {
            throw InputError("malformed .vec header: '" + line + "'");
        }
        auto r2 = std::from_chars(sp + 1, e, header_d);
        if (r2.ec != std::errc() || r2.ptr != e || header_n == 0 || header_d == 0) {
            throw InputError("malformed .vec header: '" + line + "'");
        }
    }

    const std::size_t want = std::min(header_n, max_vocab);
    EmbeddingSpace space;
    space.lang_tag = lang_tag;
    space.words.reserve(want);
    space.vectors.resize(static_cast<Eigen::Index>(want), static_cast<Eigen::Index>(header_d));

    LoadReport rep;
    std::unordered_map<std::string, int> seen;
    seen.reserve(want);
    std::vector<double> coords(header_d);

    std::size_t loaded = 0;
    while (loaded < want && reader.next(line)) {
        if (line.empty()) continue;
        ++rep.rows_seen;
        const char* b = line.c_str();
        const char* e = b + line.size();
        const char* sp = b;
        while (sp < e && *sp != ' ') ++sp;
        std::string token(b, sp);
        // Coordinates, space-separated.
        std::size_t got = 0;
        const char* p = sp;
        bool bad = false;
        while (p < e) {
            ++p;  // skip separator
            const char* q = p;
            while (q < e && *q != ' ') ++q;
            if (got >= header_d) { bad = true; break; }
            double v;
            if (!parse_double(p, q, v)) { bad = true; break; }
            if (!std::isfinite(v)) {
                throw InputError("non-finite coordinate for token '" + token + "' in " + path);
            }
            coords[got++] = v;
            p = q;
        }
        if (bad || got != header_d || token.empty()) {
            ++rep.bad_rows_skipped;
            std::cerr << "warning: skipping malformed row " << rep.rows_seen
                      << " in " << path << "\n";
            continue;
        }
        if (seen.count(token)) {
            ++rep.duplicates_skipped;
            continue;
        }
        seen.emplace(token, static_cast<int>(loaded));
        space.words.push_back(std::move(token));
        for (std::size_t j = 0; j < header_d; ++j) {
            space.vectors(static_cast<Eigen::Index>(loaded), static_cast<Eigen::Index>(j)) = coords[j];
        }
        ++loaded;
    }

    if (rep.rows_seen > 0 && rep.bad_rows_skipped * 100 > rep.rows_seen) {
        throw InputError("more than 1% malformed rows in " + path);
    }
    space.vectors.conservativeResize(static_cast<Eigen::Index>(loaded), Eigen::NoChange);
    space.rebuild_index();
    if (report) *report = rep;
    return space;
}

void save_embeddings(const EmbeddingSpace& space, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write embedding file: " + path);
    out << space.size() << ' ' << space.dim() << '\n';
    char buf[48];
    for (int i = 0; i < space.size(); ++i) {
        out << space.words[i];
        for (int j = 0; j < space.dim(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.10g", space.vectors(i, j));
            out << ' ' << buf;
        }
        out << '\n';
    }
}

EmbeddingSpace normalize(const EmbeddingSpace& space, NormMode mode, NormalizeReport* report) {
    if (mode != NormMode::l2 && mode != NormMode::center_l2) {
        throw InputError("normalize: mode must be l2 or center_l2");
    }
    if (space.normalized != NormMode::raw) {
        throw InputError("normalize: space already normalized");
    }
    EmbeddingSpace out = space;
    if (mode == NormMode::center_l2 && out.size() > 0) {
        const Eigen::RowVectorXd mean = out.vectors.colwise().mean();
        out.vectors.rowwise() -= mean;
    }
    NormalizeReport rep;
    for (int i = 0; i < out.size(); ++i) {
        const double norm = out.vectors.row(i).norm();
        if (norm < 1e-12) {
            out.vectors.row(i).setZero();
            rep.zero_rows.push_back(i);
        } else {
            out.vectors.row(i) /= norm;
        }
    }
    out.normalized = mode;
    out.rebuild_index();
    if (report) *report = rep;
    return out;
}

}  // namespace bli
