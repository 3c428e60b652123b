// Copyright 2026 The pprlkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pprl/linker.h"

#include <map>
#include <random>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "pprl/parallel.h"
#include "pprl/rng.h"

namespace pprl {

absl::string_view MatchMethodName(MatchMethod method) {
  switch (method) {
    case MatchMethod::kFirstUnique:
      return "first_unique";
    case MatchMethod::kVoting:
      return "voting";
    case MatchMethod::kBigramDice:
      return "bigram_dice";
    case MatchMethod::kBigramQgram:
      return "bigram_qgram";
  }
  return "unknown";
}

absl::StatusOr<MatchMethod> ParseMatchMethod(absl::string_view name) {
  for (MatchMethod m : {MatchMethod::kFirstUnique, MatchMethod::kVoting,
                        MatchMethod::kBigramDice, MatchMethod::kBigramQgram}) {
    if (MatchMethodName(m) == name) return m;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown match method '", name, "'"));
}

std::string EvidenceString(const MatchDecision& d) {
  if (d.method == MatchMethod::kBigramDice ||
      d.method == MatchMethod::kBigramQgram) {
    return absl::StrFormat("score=%.4f", d.score);
  }
  std::vector<std::string> parts;
  for (const SpecEvidence& e : d.evidence) {
    switch (e.outcome) {
      case SpecEvidence::Outcome::kNotApplicable:
        parts.push_back("-");
        break;
      case SpecEvidence::Outcome::kNoMatch:
        parts.push_back("N");
        break;
      case SpecEvidence::Outcome::kUnique:
        parts.push_back("U");
        break;
      case SpecEvidence::Outcome::kMultiple:
        parts.push_back(absl::StrCat("M", e.count));
        break;
    }
  }
  std::string out = absl::StrJoin(parts, ";");
  if (d.method == MatchMethod::kVoting) {
    absl::StrAppend(&out, " votes=", static_cast<int>(d.score),
                    " tied=", d.tied);
  }
  return out;
}

namespace {

SpecEvidence Classify(uint32_t spec_index, const PostingList* list) {
  SpecEvidence e;
  e.spec_index = spec_index;
  if (list == nullptr) {
    e.outcome = SpecEvidence::Outcome::kNoMatch;
  } else if (list->size() == 1) {
    e.outcome = SpecEvidence::Outcome::kUnique;
    e.count = 1;
  } else {
    e.outcome = SpecEvidence::Outcome::kMultiple;
    e.count = static_cast<uint32_t>(list->size());
  }
  return e;
}

}  // namespace

MatchDecision DeterministicLinker::LinkFirstUnique(
    const PersonRecord& query) const {
  MatchDecision d;
  d.query_row_id = query.row_id;
  d.method = MatchMethod::kFirstUnique;
  for (size_t s = 0; s < index_.size(); ++s) {
    const LinkageKeySpec& spec = index_.partition(s).spec;
    std::optional<HmacTag> tag = DeriveTag(query, spec, key_, KeyRole::kQuery);
    if (!tag) {
      d.evidence.push_back({static_cast<uint32_t>(s),
                            SpecEvidence::Outcome::kNotApplicable, 0});
      continue;
    }
    ++d.queries_issued;
    const PostingList* list = index_.Lookup(s, *tag);
    d.evidence.push_back(Classify(static_cast<uint32_t>(s), list));
    if (list != nullptr && list->size() == 1) {
      d.matched_row_id = (*list)[0];
      d.score = 1.0;
      break;
    }
  }
  return d;
}

MatchDecision DeterministicLinker::LinkVoting(const PersonRecord& query,
                                              uint64_t tiebreak_seed) const {
  MatchDecision d;
  d.query_row_id = query.row_id;
  d.method = MatchMethod::kVoting;
  std::vector<uint64_t> hits;
  for (size_t s = 0; s < index_.size(); ++s) {
    const LinkageKeySpec& spec = index_.partition(s).spec;
    std::optional<HmacTag> tag = DeriveTag(query, spec, key_, KeyRole::kQuery);
    if (!tag) {
      d.evidence.push_back({static_cast<uint32_t>(s),
                            SpecEvidence::Outcome::kNotApplicable, 0});
      continue;
    }
    ++d.queries_issued;
    const PostingList* list = index_.Lookup(s, *tag);
    d.evidence.push_back(Classify(static_cast<uint32_t>(s), list));
    if (list != nullptr) hits.insert(hits.end(), list->begin(), list->end());
  }
  if (hits.empty()) return d;
  // Sorting makes the candidate order independent of spec order.
  std::sort(hits.begin(), hits.end());
  std::vector<uint64_t> best;
  uint32_t best_votes = 0;
  for (size_t i = 0; i < hits.size();) {
    size_t j = i;
    while (j < hits.size() && hits[j] == hits[i]) ++j;
    uint32_t votes = static_cast<uint32_t>(j - i);
    if (votes > best_votes) {
      best_votes = votes;
      best.assign(1, hits[i]);
    } else if (votes == best_votes) {
      best.push_back(hits[i]);
    }
    i = j;
  }
  d.score = best_votes;
  d.tied = static_cast<uint32_t>(best.size());
  if (best.size() == 1) {
    d.matched_row_id = best[0];
  } else {
    std::mt19937_64 rng(SplitMix64(tiebreak_seed ^ SplitMix64(query.row_id)));
    std::uniform_int_distribution<size_t> pick(0, best.size() - 1);
    d.matched_row_id = best[pick(rng)];
  }
  return d;
}

std::vector<MatchDecision> DeterministicLinker::LinkAll(
    const Dataset& queries, MatchMethod method, uint64_t tiebreak_seed,
    int threads) const {
  std::vector<MatchDecision> out(queries.records.size());
  ParallelFor(out.size(), threads, [&](int, size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      out[i] = method == MatchMethod::kVoting
                   ? LinkVoting(queries.records[i], tiebreak_seed)
                   : LinkFirstUnique(queries.records[i]);
    }
  });
  return out;
}

std::string BlockingKey(const PersonRecord& record,
                        const BlockingStrategy& strategy) {
  if (strategy.kind == BlockingStrategy::Kind::kBySa3) return record.sa3;
  return DeriveSa3(record.meshblock, strategy.prefix_len);
}

std::vector<Block> BlockDataset(const Dataset& dataset,
                                const BlockingStrategy& strategy) {
  std::map<std::string, std::vector<uint64_t>> grouped;
  for (const PersonRecord& r : dataset.records) {
    grouped[BlockingKey(r, strategy)].push_back(r.row_id);
  }
  std::vector<Block> blocks;
  blocks.reserve(grouped.size());
  for (auto& [key, rows] : grouped) blocks.push_back({key, std::move(rows)});
  return blocks;
}

double DiceSets(const BigramSet& a, const BigramSet& b) {
  return DiceSorted<BigramCode>(a.codes(), b.codes());
}

double QgramSimilarity(const std::vector<BigramCode>& a,
                       const std::vector<BigramCode>& b) {
  return QgramSorted<BigramCode>(a, b);
}

absl::StatusOr<BigramMatcher> BigramMatcher::Create(
    const Dataset& reference, const HmacKey& key,
    const BigramMatcherOptions& options) {
  if (options.scoring != MatchMethod::kBigramDice &&
      options.scoring != MatchMethod::kBigramQgram) {
    return absl::InvalidArgumentError("bi-gram matcher needs a bi-gram scoring");
  }
  BigramMatcher m(key, options);
  m.code_tags_.resize(1 << 16);
  for (uint32_t code = 0; code < (1u << 16); ++code) {
    HmacTag tag = ComputeHmac(key, BigramString(static_cast<BigramCode>(code)));
    m.code_tags_[code] = LoadBigEndian64(tag);
  }
  m.blocks_ = BlockDataset(reference, options.blocking);
  absl::flat_hash_map<uint64_t, const PersonRecord*> by_row;
  by_row.reserve(reference.records.size());
  for (const PersonRecord& r : reference.records) by_row[r.row_id] = &r;
  m.members_.resize(m.blocks_.size());
  for (size_t b = 0; b < m.blocks_.size(); ++b) {
    m.block_lookup_[m.blocks_[b].blocking_key] = b;
    for (uint64_t row : m.blocks_[b].row_ids) {
      const PersonRecord& r = *by_row.at(row);
      m.members_[b].push_back(
          {row, m.Encode(r.first_name), m.Encode(r.last_name)});
    }
  }
  return m;
}

BigramMatcher::EncodedName BigramMatcher::Encode(absl::string_view name) const {
  EncodedName out;
  absl::StatusOr<std::vector<BigramCode>> codes = BigramMultiset(name);
  if (!codes.ok()) return out;
  for (BigramCode c : *codes) out.multiset.push_back(code_tags_[c]);
  std::sort(out.multiset.begin(), out.multiset.end());
  out.set = out.multiset;
  out.set.erase(std::unique(out.set.begin(), out.set.end()), out.set.end());
  return out;
}

double BigramMatcher::FieldScore(const EncodedName& a,
                                 const EncodedName& b) const {
  if (options_.scoring == MatchMethod::kBigramQgram) {
    return QgramSorted<uint64_t>(a.multiset, b.multiset);
  }
  return DiceSorted<uint64_t>(a.set, b.set);
}

MatchDecision BigramMatcher::Link(const PersonRecord& query) const {
  MatchDecision d;
  d.query_row_id = query.row_id;
  d.method = options_.scoring;
  auto it = block_lookup_.find(BlockingKey(query, options_.blocking));
  if (it == block_lookup_.end()) return d;
  const EncodedName first = Encode(query.first_name);
  const EncodedName last = Encode(query.last_name);
  double best = -1.0;
  uint64_t best_row = 0;
  for (const Member& m : members_[it->second]) {
    double score = 0.5 * (FieldScore(first, m.first) + FieldScore(last, m.last));
    ++d.comparisons;
    if (options_.transposed_pass) {
      double swapped =
          0.5 * (FieldScore(last, m.first) + FieldScore(first, m.last));
      ++d.comparisons;
      score = std::max(score, swapped);
    }
    if (score > best || (score == best && m.row_id < best_row)) {
      best = score;
      best_row = m.row_id;
    }
  }
  if (best >= options_.threshold) {
    d.matched_row_id = best_row;
  }
  d.score = std::max(best, 0.0);
  return d;
}

std::vector<MatchDecision> BigramMatcher::LinkAll(const Dataset& queries,
                                                  int threads) const {
  std::vector<MatchDecision> out(queries.records.size());
  ParallelFor(out.size(), threads, [&](int, size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) out[i] = Link(queries.records[i]);
  });
  return out;
}

std::string DecisionsCsv(const std::vector<MatchDecision>& decisions) {
  std::string out = "query_row_id,matched_row_id,method,score_or_evidence\n";
  for (const MatchDecision& d : decisions) {
    absl::StrAppend(&out, d.query_row_id, ",",
                    d.matched_row_id ? absl::StrCat(*d.matched_row_id) : "",
                    ",", MatchMethodName(d.method), ",", EvidenceString(d),
                    "\n");
  }
  return out;
}

}  // namespace pprl
