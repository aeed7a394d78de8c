#include "bli/embeddings.hpp"

#include "test_support.hpp"

#include <doctest.h>
#include <zlib.h>

#include <cmath>

using namespace bli;
using namespace bli_test;

TEST_CASE("load_embeddings reads the fastText text format") {
    TempDir tmp("emb_load");
    write_file(tmp.path("toy.vec"), "3 2\na 1 2\nb 3 4\nc 5 6\n");

    const EmbeddingSpace space = load_embeddings(tmp.path("toy.vec"), 100, "xx");
    CHECK(space.size() == 3);
    CHECK(space.dim() == 2);
    CHECK(space.words == std::vector<std::string>{"a", "b", "c"});
    CHECK(space.vectors(0, 0) == doctest::Approx(1.0));
    CHECK(space.vectors(2, 1) == doctest::Approx(6.0));
    CHECK(space.lang_tag == "xx");
    CHECK(space.normalized == NormMode::raw);
}

TEST_CASE("load_embeddings truncates at max_vocab") {
    TempDir tmp("emb_trunc");
    write_file(tmp.path("toy.vec"), "3 2\na 1 2\nb 3 4\nc 5 6\n");
    const EmbeddingSpace space = load_embeddings(tmp.path("toy.vec"), 2);
    CHECK(space.size() == 2);
    CHECK(space.words == std::vector<std::string>{"a", "b"});
}

TEST_CASE("duplicate tokens keep the first occurrence and are counted") {
    TempDir tmp("emb_dup");
    write_file(tmp.path("dup.vec"), "3 2\na 1 2\nb 3 4\na 9 9\n");
    LoadReport report;
    const EmbeddingSpace space = load_embeddings(tmp.path("dup.vec"), 100, "", &report);
    CHECK(space.size() == 2);
    CHECK(report.duplicates_skipped == 1);
    CHECK(space.vectors(0, 0) == doctest::Approx(1.0));  // first occurrence wins
}

TEST_CASE("malformed header fails") {
    TempDir tmp("emb_badheader");
    write_file(tmp.path("bad.vec"), "banana\na 1 2\n");
    CHECK_THROWS_AS(load_embeddings(tmp.path("bad.vec"), 10), InputError);
    write_file(tmp.path("bad2.vec"), "3\na 1 2\n");
    CHECK_THROWS_AS(load_embeddings(tmp.path("bad2.vec"), 10), InputError);
}

TEST_CASE("wrong coordinate count is skipped with a warning, capped at 1%") {
    TempDir tmp("emb_badrow");
    // 1 bad row out of 200 seen: under the 1% threshold.
    std::string ok;
    ok += "200 2\n";
    for (int i = 0; i < 199; ++i) ok += "w" + std::to_string(i) + " 1 2\n";
    ok += "broken 1\n";
    LoadReport report;
    SUBCASE("under threshold") {
        write_file(tmp.path("ok.vec"), ok);
        const EmbeddingSpace s = load_embeddings(tmp.path("ok.vec"), 1000, "", &report);
        CHECK(s.size() == 199);
        CHECK(report.bad_rows_skipped == 1);
    }
    SUBCASE("over threshold") {
        write_file(tmp.path("bad.vec"), "10 2\na 1 2\nbroken 1\nc 3 4\n");
        CHECK_THROWS_AS(load_embeddings(tmp.path("bad.vec"), 10), InputError);
    }
}

TEST_CASE("non-finite coordinates fail") {
    TempDir tmp("emb_nonfinite");
    write_file(tmp.path("nan.vec"), "2 2\na 1 2\nb nan 4\n");
    CHECK_THROWS_AS(load_embeddings(tmp.path("nan.vec"), 10), InputError);
    write_file(tmp.path("inf.vec"), "2 2\na 1 2\nb inf 4\n");
    CHECK_THROWS_AS(load_embeddings(tmp.path("inf.vec"), 10), InputError);
}

TEST_CASE("gzip-compressed files load when the name ends .gz") {
    TempDir tmp("emb_gz");
    const std::string content = "2 3\nhello 1 2 3\nworld 4 5 6\n";
    gzFile gz = gzopen(tmp.path("toy.vec.gz").c_str(), "wb");
    REQUIRE(gz != nullptr);
    gzwrite(gz, content.data(), static_cast<unsigned>(content.size()));
    gzclose(gz);

    const EmbeddingSpace space = load_embeddings(tmp.path("toy.vec.gz"), 10);
    CHECK(space.size() == 2);
    CHECK(space.words[1] == "world");
    CHECK(space.vectors(1, 2) == doctest::Approx(6.0));
}

TEST_CASE("l2 normalization scales rows to unit norm") {
    EmbeddingSpace space;
    space.words = {"a"};
    space.vectors.resize(1, 2);
    space.vectors << 3.0, 4.0;
    space.rebuild_index();

    const EmbeddingSpace out = normalize(space, NormMode::l2);
    CHECK(out.vectors(0, 0) == doctest::Approx(0.6));
    CHECK(out.vectors(0, 1) == doctest::Approx(0.8));
    CHECK(out.normalized == NormMode::l2);
}

TEST_CASE("center_l2 on a symmetric pair leaves it unchanged") {
    EmbeddingSpace space;
    space.words = {"a", "b"};
    space.vectors.resize(2, 2);
    space.vectors << 1.0, 0.0, -1.0, 0.0;
    space.rebuild_index();

    const EmbeddingSpace out = normalize(space, NormMode::center_l2);
    CHECK(out.vectors(0, 0) == doctest::Approx(1.0));
    CHECK(out.vectors(1, 0) == doctest::Approx(-1.0));
    CHECK(out.vectors(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("normalization yields unit rows on random input") {
    Rng rng(123);
    EmbeddingSpace space;
    space.vectors = random_matrix(10, 4, rng);
    for (int i = 0; i < 10; ++i) space.words.push_back("w" + std::to_string(i));
    space.rebuild_index();

    for (NormMode mode : {NormMode::l2, NormMode::center_l2}) {
        const EmbeddingSpace out = normalize(space, mode);
        for (int i = 0; i < out.size(); ++i) {
            CHECK(out.vectors.row(i).norm() == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("zero rows stay zero and are reported") {
    EmbeddingSpace space;
    space.words = {"a", "z"};
    space.vectors.resize(2, 2);
    space.vectors << 3.0, 4.0, 0.0, 0.0;
    space.rebuild_index();

    NormalizeReport report;
    const EmbeddingSpace out = normalize(space, NormMode::l2, &report);
    CHECK(report.zero_rows == std::vector<int>{1});
    CHECK(out.vectors.row(1).norm() == 0.0);
    CHECK(out.zero_rows() == std::vector<int>{1});
}

TEST_CASE("normalize requires a raw space") {
    EmbeddingSpace space;
    space.words = {"a"};
    space.vectors.resize(1, 2);
    space.vectors << 1.0, 0.0;
    space.rebuild_index();
    const EmbeddingSpace once = normalize(space, NormMode::l2);
    CHECK_THROWS_AS(normalize(once, NormMode::l2), InputError);
}

TEST_CASE("l2 normalization is idempotent as a map") {
    Rng rng(7);
    EmbeddingSpace space;
    space.vectors = random_matrix(8, 3, rng);
    for (int i = 0; i < 8; ++i) space.words.push_back("w" + std::to_string(i));
    space.rebuild_index();

    const EmbeddingSpace once = normalize(space, NormMode::l2);
    EmbeddingSpace raw_again = once;
    raw_again.normalized = NormMode::raw;
    const EmbeddingSpace twice = normalize(raw_again, NormMode::l2);
    CHECK((twice.vectors - once.vectors).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("lookup is exact-match and case-sensitive") {
    EmbeddingSpace space;
    space.words = {"cat", "Cat"};
    space.vectors = Matrix::Identity(2, 2);
    space.rebuild_index();

    CHECK(space.lookup("cat") == 0);
    CHECK(space.lookup("Cat") == 1);
    CHECK(!space.lookup("CAT").has_value());
    CHECK(!space.lookup("dog").has_value());
}

TEST_CASE("lookup inverts the word list") {
    Rng rng(99);
    EmbeddingSpace space;
    space.vectors = random_matrix(20, 3, rng);
    for (int i = 0; i < 20; ++i) space.words.push_back("tok" + std::to_string(i * 7));
    space.rebuild_index();
    for (int i = 0; i < space.size(); ++i) {
        CHECK(space.lookup(space.words[i]) == i);
    }
}

TEST_CASE("save then load round-trips tokens and coordinates") {
    TempDir tmp("emb_roundtrip");
    Rng rng(31);
    EmbeddingSpace space;
    space.vectors = random_matrix(12, 5, rng, 2.5);
    for (int i = 0; i < 12; ++i) space.words.push_back("w" + std::to_string(i));
    space.rebuild_index();

    save_embeddings(space, tmp.path("rt.vec"));
    const EmbeddingSpace back = load_embeddings(tmp.path("rt.vec"), 100);
    REQUIRE(back.size() == space.size());
    CHECK(back.words == space.words);
    CHECK((back.vectors - space.vectors).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("max_vocab must be positive") {
    CHECK_THROWS_AS(load_embeddings("/nonexistent.vec", 0), InputError);
}
