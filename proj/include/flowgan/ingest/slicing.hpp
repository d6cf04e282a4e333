#pragma once

#include <span>
#include <vector>

#include "flowgan/core/error.hpp"
#include "flowgan/tokenize/vocabulary.hpp"

namespace flowgan::ingest {

/// A start window followed by the real window it precedes in the source flow.
struct TrainingPair {
  tokenize::FlowSequence start;
  tokenize::FlowSequence real;
};

/// Cuts the token stream into consecutive, non-overlapping slices of
/// `slice_len` and halves each into (start, real). A trailing partial slice is
/// dropped.
inline std::vector<TrainingPair> slice_flow(std::span<const tokenize::TokenId> tokens,
                                            std::size_t slice_len = 400) {
  if (slice_len == 0 || slice_len % 2 != 0) throw ConfigError("slice length must be even and positive");
  const std::size_t half = slice_len / 2;
  std::vector<TrainingPair> pairs;
  pairs.reserve(tokens.size() / slice_len);
  for (std::size_t off = 0; off + slice_len <= tokens.size(); off += slice_len) {
    TrainingPair p;
    p.start.origin = tokenize::Origin::start;
    p.real.origin = tokenize::Origin::real;
    p.start.tokens.assign(tokens.begin() + off, tokens.begin() + off + half);
    p.real.tokens.assign(tokens.begin() + off + half, tokens.begin() + off + slice_len);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

}  // namespace flowgan::ingest
