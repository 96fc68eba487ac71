#include <gtest/gtest.h>

#include <random>
#include <set>

#include "asag/error.hpp"
#include "asag/hashing.hpp"
#include "asag/rng.hpp"
#include "asag/text.hpp"
#include "oracles.hpp"

using namespace asag;

TEST(Hashing, Sha256KnownVectors) {
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Hashing, Sha256MatchesReferenceImplementation) {
    std::mt19937 gen(7);
    for (int len : {0, 1, 55, 56, 63, 64, 65, 127, 128, 1000}) {
        std::string s;
        for (int i = 0; i < len; ++i) s.push_back(static_cast<char>(gen() & 0xff));
        EXPECT_EQ(sha256_hex(s), oracle::sha256(s)) << "length " << len;
    }
}

TEST(Hashing, GitBlobSha1MatchesGitHashObject) {
    // `printf 'hello\n' | git hash-object --stdin`
    EXPECT_EQ(git_blob_sha1("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
    // The empty blob.
    EXPECT_EQ(git_blob_sha1(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST(Hashing, FileRoundTrip) {
    oracle::TempDir tmp("hash");
    const std::string content("a\0b\nc", 5);
    write_file(tmp.path() / "sub" / "f.bin", content);
    EXPECT_EQ(read_file(tmp.path() / "sub" / "f.bin"), content);
    EXPECT_THROW(read_file(tmp.path() / "missing"), Error);
}

TEST(Text, TrimAndNormalize) {
    EXPECT_EQ(text::trim("  a b \t\n"), "a b");
    EXPECT_EQ(text::trim("   "), "");
    EXPECT_EQ(text::normalize("  Guillain-BARRÉ \t  Syndrome "), "guillain-barré syndrome");
}

TEST(Text, CasefoldLatin1) {
    EXPECT_EQ(text::casefold("ÀÉÎÕÜ ABC"), "àéîõü abc");
    EXPECT_EQ(text::casefold("ß"), "ß");
}

TEST(Text, TokenizeSplitsOnPunctuationAndKeepsOffsets) {
    const std::string s = "A 45-year-old man, fever!";
    const auto spans = text::tokenize_spans(s);
    std::vector<std::string> words;
    for (const auto& t : spans) {
        words.push_back(t.text);
        EXPECT_EQ(text::casefold(s.substr(t.begin, t.end - t.begin)), t.text);
    }
    EXPECT_EQ(words, (std::vector<std::string>{"a", "45", "year", "old", "man", "fever"}));
}

TEST(Text, TokenizeKeepsListedHyphenatedTerms) {
    const std::unordered_set<std::string> keep = {"guillain-barré"};
    EXPECT_EQ(text::tokenize("Guillain-Barré syndrome", &keep),
              (std::vector<std::string>{"guillain-barré", "syndrome"}));
    EXPECT_EQ(text::tokenize("Guillain-Barré syndrome"),
              (std::vector<std::string>{"guillain", "barré", "syndrome"}));
}

TEST(Text, SplitSentences) {
    EXPECT_EQ(text::split_sentences("He has fever. Temp 38.5 C! Why? "),
              (std::vector<std::string>{"He has fever.", "Temp 38.5 C!", "Why?"}));
    EXPECT_TRUE(text::split_sentences("   ").empty());
}

TEST(Rng, MatchesStandardEngine) {
    Rng rng(5);
    std::mt19937_64 ref(5);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(rng.next(), ref());
}

TEST(Rng, IndexStaysInRangeAndCoversIt) {
    Rng rng(9);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 2000; ++i) {
        const auto x = rng.index(7);
        ASSERT_LT(x, 7u);
        seen.insert(x);
    }
    EXPECT_EQ(seen.size(), 7u);
    for (int i = 0; i < 1000; ++i) {
        const auto b = rng.between(-3, 3);
        ASSERT_GE(b, -3);
        ASSERT_LE(b, 3);
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(Rng, SampleIndicesDistinctAscending) {
    Rng rng(1);
    for (std::size_t n = 0; n < 30; ++n) {
        for (std::size_t k = 0; k <= n + 2; ++k) {
            const auto s = rng.sample_indices(n, k);
            ASSERT_EQ(s.size(), std::min(n, k));
            for (std::size_t i = 0; i < s.size(); ++i) {
                ASSERT_LT(s[i], n);
                if (i > 0) ASSERT_LT(s[i - 1], s[i]);
            }
        }
    }
}

TEST(Rng, ShuffleIsPermutation) {
    Rng rng(3);
    std::vector<int> v(50);
    for (int i = 0; i < 50; ++i) v[i] = i;
    auto w = v;
    rng.shuffle(w);
    EXPECT_NE(v, w);
    std::sort(w.begin(), w.end());
    EXPECT_EQ(v, w);
}

TEST(Rng, DeriveSeedSeparatesLabels) {
    EXPECT_EQ(derive_seed(42, "a"), derive_seed(42, "a"));
    EXPECT_NE(derive_seed(42, "a"), derive_seed(42, "b"));
    EXPECT_NE(derive_seed(42, "a"), derive_seed(43, "a"));
    // FNV-1a 64 test vectors.
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}
