#include <catch_amalgamated.hpp>

#include <atomic>
#include <cmath>
#include <limits>

#include "tabtext/embedding.hpp"
#include "tabtext/error.hpp"

using namespace tabtext;

namespace {

// Embeds a text as (length, number of spaces, 1) and counts calls.
class CountingBackend : public EmbeddingBackend {
 public:
  explicit CountingBackend(std::size_t max_chars = 20) : EmbeddingBackend(3, max_chars) {}
  std::string id() const override { return "counting"; }
  std::size_t max_in_flight() const override { return 4; }
  std::vector<Embedding> embed_batch(std::span<const std::string> texts) override {
    ++calls;
    pieces += texts.size();
    std::vector<Embedding> out;
    for (const auto& t : texts) {
      double spaces = 0;
      for (char c : t) spaces += c == ' ';
      out.emplace_back(std::vector<double>{static_cast<double>(t.size()), spaces, 1.0});
    }
    return out;
  }
  std::atomic<int> calls{0};
  std::atomic<std::size_t> pieces{0};
};

// Misbehaves on texts containing "bad".
class FaultyBackend : public EmbeddingBackend {
 public:
  enum class Mode { Throw, WrongCount, WrongDim, NonFinite };
  explicit FaultyBackend(Mode mode) : EmbeddingBackend(2, 510), mode_(mode) {}
  std::string id() const override { return "faulty"; }
  std::vector<Embedding> embed_batch(std::span<const std::string> texts) override {
    std::vector<Embedding> out;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      const bool bad = texts[i].find("bad") != std::string::npos;
      if (bad && mode_ == Mode::Throw) throw BackendError("refused", i);
      if (bad && mode_ == Mode::WrongCount) return out;
      if (bad && mode_ == Mode::WrongDim) {
        out.emplace_back(std::vector<double>{1, 2, 3});
      } else if (bad && mode_ == Mode::NonFinite) {
        out.emplace_back(std::vector<double>{std::numeric_limits<double>::quiet_NaN(), 0});
      } else {
        out.emplace_back(std::vector<double>{1, 0});
      }
    }
    return out;
  }

 private:
  Mode mode_;
};

}  // namespace

TEST_CASE("chunk_text boundaries", "[chunking]") {
  CHECK(chunk_text("", 510).empty());
  CHECK(chunk_text(" \t\n ", 510).empty());
  CHECK(chunk_text("  hello   world ", 510) == std::vector<std::string>{"hello world"});
  CHECK(chunk_text("aaa bbb ccc", 7) == std::vector<std::string>{"aaa bbb", "ccc"});
  CHECK(chunk_text("aaa bbb ccc", 6) == std::vector<std::string>{"aaa", "bbb", "ccc"});
  CHECK(chunk_text("abcdefgh xy", 3) == std::vector<std::string>{"abc", "def", "gh", "xy"});
  CHECK_THROWS_AS(chunk_text("x", 0), ValidationError);
}

TEST_CASE("chunk_text: a 1200-character token splits 510/510/180", "[chunking]") {
  const auto chunks = chunk_text(std::string(1200, 'a'), 510);
  REQUIRE(chunks.size() == 3);
  CHECK(chunks[0].size() == 510);
  CHECK(chunks[1].size() == 510);
  CHECK(chunks[2].size() == 180);
}

TEST_CASE("chunk_text: a text of exactly 510 characters stays whole", "[chunking]") {
  std::string text;
  while (text.size() < 510) text += text.empty() ? "w" : " w";
  text.resize(510, 'z');
  CHECK(chunk_text(text, 510).size() == 1);
}

TEST_CASE("chunk_text measures code points, not bytes", "[chunking]") {
  std::string word;
  for (int i = 0; i < 4; ++i) word += "\xC3\xA9";  // 4 code points, 8 bytes
  const auto chunks = chunk_text(word + " " + word, 9);
  CHECK(chunks.size() == 1);
  const auto split = chunk_text(std::string("\xE2\x82\xAC\xE2\x82\xAC\xE2\x82\xAC"), 2);
  CHECK(split == std::vector<std::string>{"\xE2\x82\xAC\xE2\x82\xAC", "\xE2\x82\xAC"});
}

TEST_CASE("embed_text: short text passes through, long text averages chunks", "[embedding]") {
  CountingBackend backend(7);
  CHECK(embed_text("ab  c", backend).values == std::vector<double>{5, 2, 1});
  // "aaa bbb ccc" -> "aaa bbb" (7, 1) and "ccc" (3, 0)
  CHECK(embed_text("aaa bbb ccc", backend).values == std::vector<double>{5, 0.5, 1});
  CHECK(embed_text("   ", backend).values == std::vector<double>{0, 0, 0});
  CHECK(embed_text("", backend).values == std::vector<double>{0, 0, 0});
}

TEST_CASE("embed_texts matches per-text embedding and deduplicates", "[embedding]") {
  std::vector<std::string> texts;
  for (int i = 0; i < 50; ++i) texts.push_back("row " + std::to_string(i % 7) + " with some words");
  texts.push_back("");
  CountingBackend reference(20);
  std::vector<Embedding> expected;
  for (const auto& t : texts) expected.push_back(embed_text(t, reference));

  for (std::size_t workers : {1U, 3U}) {
    CountingBackend backend(20);
    const auto out = embed_texts(texts, backend, EmbedOptions{4, workers});
    REQUIRE(out.size() == texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) CHECK(out[i].values == expected[i].values);
    // 7 distinct texts, each split into two chunks ("row N with some", "words"), "words" shared.
    CHECK(backend.pieces == 8);
  }
}

TEST_CASE("embed_texts surfaces backend faults with the offending text index", "[embedding]") {
  const std::vector<std::string> texts = {"fine", "also fine", "bad one", "bad two"};
  using Mode = FaultyBackend::Mode;
  for (auto mode : {Mode::Throw, Mode::WrongCount, Mode::WrongDim, Mode::NonFinite}) {
    FaultyBackend backend(mode);
    try {
      embed_texts(texts, backend, EmbedOptions{1, 1});
      FAIL("expected BackendError");
    } catch (const BackendError& e) {
      CHECK(e.text_index() == 2);
    }
  }
}

TEST_CASE("concatenate", "[embedding]") {
  const std::vector<Embedding> parts = {Embedding(std::vector<double>{1, 2}), Embedding::zeros(1),
                                        Embedding(std::vector<double>{3})};
  CHECK(concatenate(parts).values == std::vector<double>{1, 2, 0, 3});
}

TEST_CASE("embed_entity_sources", "[embedding]") {
  CountingBackend backend(100);
  const std::vector<std::string> texts = {"A.", "B b."};
  CHECK(embed_entity_sources(texts, CombineMode::SeparateEmbeddings, backend).values ==
        std::vector<double>{2, 0, 1, 4, 1, 1});
  CHECK(embed_entity_sources(texts, CombineMode::SingleParagraph, backend).values ==
        std::vector<double>{7, 2, 1});
}
