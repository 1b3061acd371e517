#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lexrisk/corpus.hpp"

namespace lexrisk::synthetic {

// Generators for desk-scale corpora with a known answer. Topic A paragraphs
// are tagged `category_a`, topic B paragraphs `category_b`; the two topic
// vocabularies are disjoint and both mix in a shared filler vocabulary.

struct TwoTopicOptions {
  std::size_t paragraphs = 200;
  std::size_t min_length = 25;
  std::size_t max_length = 40;
  double filler_share = 0.3;  // fraction of tokens drawn from shared filler words
  std::uint64_t seed = 7;
  std::string category_a = "Termination";
  std::string category_b = "Indemnity";
  std::string doc_prefix = "syn";
};

const std::vector<std::string>& topic_a_words();
const std::vector<std::string>& topic_b_words();
const std::vector<std::string>& filler_words();

/// Alternates topics A, B, A, ... so each topic gets half the paragraphs.
std::vector<Paragraph> two_topic_corpus(const TwoTopicOptions& options);

/// One paragraph of the given topic.
std::string topic_paragraph(bool topic_a, std::size_t length, double filler_share, Rng& rng);

struct PlantedDocument {
  std::string text;                     // paragraphs separated by blank lines
  std::vector<std::string> paragraphs;  // same paragraphs, in order
  std::vector<std::size_t> planted;     // indices of topic-A paragraphs
};

/// `total` paragraphs, of which `planted` (at seeded positions) are topic A
/// and the rest topic B.
PlantedDocument planted_document(std::size_t total, std::size_t planted, std::uint64_t seed);

}  // namespace lexrisk::synthetic
