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

#include "pprl/bloom.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <tuple>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "pprl/parallel.h"
#include "pprl/rng.h"

namespace pprl {

void Welford::Add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void Welford::Merge(const Welford& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double n = na + nb;
  const double delta = other.mean_ - mean_;
  mean_ += delta * nb / n;
  m2_ += other.m2_ + delta * delta * na * nb / n;
  n_ += other.n_;
}

double Welford::variance() const {
  return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1);
}

double Welford::stddev() const { return std::sqrt(variance()); }

absl::StatusOr<BloomFamily> BloomFamily::Universal(uint64_t m, uint32_t k,
                                                   std::mt19937_64& rng) {
  if (k < 1 || m < 2) {
    return absl::InvalidArgumentError("universal family needs k >= 1, m >= 2");
  }
  std::vector<UniversalHashParams> members;
  for (uint32_t i = 0; i < k; ++i) {
    members.push_back(UniversalHashParams::Random(rng, m));
  }
  return FromUniversal(std::move(members));
}

absl::StatusOr<BloomFamily> BloomFamily::FromUniversal(
    std::vector<UniversalHashParams> members) {
  if (members.empty()) {
    return absl::InvalidArgumentError("universal family needs k >= 1");
  }
  const uint64_t m = members[0].range;
  if (m < 2) return absl::InvalidArgumentError("m must be >= 2");
  for (const UniversalHashParams& p : members) {
    absl::StatusOr<UniversalHashParams> checked =
        UniversalHashParams::Create(p.a, p.b, p.range);
    if (!checked.ok()) return checked.status();
    if (p.range != m) {
      return absl::InvalidArgumentError("members disagree on the range m");
    }
  }
  BloomFamily f;
  f.kind_ = Kind::kUniversal;
  f.m_ = m;
  f.k_ = static_cast<uint32_t>(members.size());
  f.universal_ = std::move(members);
  return f;
}

absl::StatusOr<BloomFamily> BloomFamily::DoubleHash(
    const DoubleHashParams& params) {
  if (absl::Status s = params.Validate(); !s.ok()) return s;
  BloomFamily f;
  f.kind_ = Kind::kDoubleHash;
  f.m_ = params.m;
  f.k_ = params.k;
  f.double_hash_ = params;
  return f;
}

std::string BloomFamily::Describe() const {
  if (kind_ == Kind::kUniversal) return "universal";
  return absl::StrCat(
      double_hash_.enhancement == DoubleHashEnhancement::kEnhanced
          ? "enhanced_double"
          : "double",
      "_", HashPairName(double_hash_.hash_pair));
}

void BloomFamily::Indices(absl::string_view element,
                          std::vector<uint64_t>& out) const {
  if (kind_ == Kind::kDoubleHash) {
    DoubleHashIndicesFrom(double_hash_,
                          ComputeBaseHashes(double_hash_.hash_pair, element),
                          out);
    return;
  }
  uint64_t x = 0;
  if (element.size() <= 8) {
    for (char c : element) x = (x << 8) | static_cast<uint8_t>(c);
  } else {
    x = LoadBigEndian64(Sha256(element));
  }
  out.clear();
  for (const UniversalHashParams& p : universal_) {
    out.push_back(UniversalHash(p, x));
  }
}

void BloomFamily::IndicesForCode(BigramCode code,
                                 std::vector<uint64_t>& out) const {
  if (kind_ == Kind::kUniversal) {
    out.clear();
    for (const UniversalHashParams& p : universal_) {
      out.push_back(UniversalHash(p, code));
    }
    return;
  }
  Indices(BigramString(code), out);
}

bool operator==(const BloomFamily& a, const BloomFamily& b) {
  if (a.kind_ != b.kind_ || a.m_ != b.m_ || a.k_ != b.k_) return false;
  if (a.kind_ == BloomFamily::Kind::kDoubleHash) {
    return a.double_hash_.enhancement == b.double_hash_.enhancement &&
           a.double_hash_.hash_pair == b.double_hash_.hash_pair;
  }
  for (size_t i = 0; i < a.universal_.size(); ++i) {
    const UniversalHashParams& x = a.universal_[i];
    const UniversalHashParams& y = b.universal_[i];
    if (x.a != y.a || x.b != y.b || x.p != y.p || x.range != y.range) {
      return false;
    }
  }
  return true;
}

BloomFilter::BloomFilter(std::shared_ptr<const BloomFamily> family)
    : family_(std::move(family)), words_((family_->m() + 63) / 64, 0) {}

void BloomFilter::SetAll(const std::vector<uint64_t>& indices) {
  for (uint64_t i : indices) words_[i >> 6] |= uint64_t{1} << (i & 63);
  ++inserted_;
}

void BloomFilter::Insert(absl::string_view element) {
  family_->Indices(element, scratch_);
  SetAll(scratch_);
}

void BloomFilter::InsertCode(BigramCode code) {
  family_->IndicesForCode(code, scratch_);
  SetAll(scratch_);
}

void BloomFilter::InsertBigrams(const BigramSet& set) {
  for (BigramCode c : set.codes()) InsertCode(c);
}

bool BloomFilter::MightContain(absl::string_view element) const {
  family_->Indices(element, scratch_);
  return std::all_of(scratch_.begin(), scratch_.end(),
                     [&](uint64_t i) { return Test(i); });
}

uint64_t BloomFilter::PopCount() const {
  uint64_t n = 0;
  for (uint64_t w : words_) n += std::popcount(w);
  return n;
}

std::string BloomFilter::BitString() const {
  std::string out(size(), '0');
  for (uint64_t i = 0; i < size(); ++i) {
    if (Test(i)) out[i] = '1';
  }
  return out;
}

absl::StatusOr<double> BloomDice(const BloomFilter& a, const BloomFilter& b) {
  if (!(a.family() == b.family())) {
    return absl::InvalidArgumentError(
        "cannot compare filters built with different hash families");
  }
  uint64_t both = 0;
  for (size_t i = 0; i < a.words().size(); ++i) {
    both += std::popcount(a.words()[i] & b.words()[i]);
  }
  const uint64_t total = a.PopCount() + b.PopCount();
  if (total == 0) return 0.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(total);
}

UniformityResult UniformityExperiment(const BloomFamily& family,
                                      uint64_t n_filters,
                                      uint32_t inserts_per_filter,
                                      uint64_t seed) {
  const uint64_t m = family.m();
  const uint32_t k = family.k();
  UniformityResult result;
  result.histogram.assign(m, 0);
  if (n_filters > 0) {
    // The input domain is only 2^16 values, so every index list is computed
    // once up front.
    std::vector<uint32_t> table((size_t{1} << 16) * k, 0);
    std::vector<uint64_t> idx;
    for (uint32_t v = 0; v < (1u << 16); ++v) {
      const char bytes[2] = {static_cast<char>(v >> 8), static_cast<char>(v)};
      family.Indices(absl::string_view(bytes, 2), idx);
      for (uint32_t i = 0; i < k; ++i) {
        table[static_cast<size_t>(v) * k + i] = static_cast<uint32_t>(idx[i]);
      }
    }
    std::mt19937_64 rng = MakeRng(seed, "uniformity");
    std::uniform_int_distribution<uint32_t> value(0, (1u << 16) - 1);
    std::vector<uint64_t> stamp(m, 0);
    for (uint64_t f = 1; f <= n_filters; ++f) {
      for (uint32_t e = 0; e < inserts_per_filter; ++e) {
        const uint32_t v = value(rng);
        for (uint32_t i = 0; i < k; ++i) {
          const uint32_t bit = table[static_cast<size_t>(v) * k + i];
          if (stamp[bit] != f) {
            stamp[bit] = f;
            ++result.histogram[bit];
          }
        }
      }
    }
  }
  double sum = 0.0;
  for (uint64_t c : result.histogram) sum += static_cast<double>(c);
  result.mean = sum / static_cast<double>(m);
  double sq = 0.0;
  for (uint64_t c : result.histogram) {
    const double d = static_cast<double>(c) - result.mean;
    sq += d * d;
  }
  result.stddev = std::sqrt(sq / static_cast<double>(m));
  return result;
}

double OverestimationStats::equal_fraction() const {
  return total_comparisons == 0 ? 0.0
                                : static_cast<double>(equal_count) /
                                      static_cast<double>(total_comparisons);
}

double OverestimationStats::bloom_greater_fraction() const {
  return total_comparisons == 0 ? 0.0
                                : static_cast<double>(bloom_greater_count) /
                                      static_cast<double>(total_comparisons);
}

double OverestimationStats::ngram_greater_fraction() const {
  return total_comparisons == 0 ? 0.0
                                : static_cast<double>(ngram_greater_count) /
                                      static_cast<double>(total_comparisons);
}

namespace {

struct PairPick {
  double key;  // larger is better
  double bloom;
  double ngram;
  uint32_t i;
  uint32_t j;
};

bool PickBefore(const PairPick& a, const PairPick& b) {
  if (a.key != b.key) return a.key > b.key;
  return std::tie(a.i, a.j) < std::tie(b.i, b.j);
}

// Keeps the best kExtremeExampleCount picks.
class TopPicks {
 public:
  bool Wants(double key) const {
    return picks_.size() < kExtremeExampleCount || key >= picks_.back().key;
  }
  void Offer(const PairPick& p) {
    auto pos = std::lower_bound(picks_.begin(), picks_.end(), p, PickBefore);
    picks_.insert(pos, p);
    if (picks_.size() > kExtremeExampleCount) picks_.pop_back();
  }
  void Merge(const TopPicks& other) {
    for (const PairPick& p : other.picks_) Offer(p);
  }
  const std::vector<PairPick>& picks() const { return picks_; }

 private:
  std::vector<PairPick> picks_;
};

struct EncodedName {
  std::vector<BigramCode> codes;
  uint32_t popcount = 0;
};

struct ShardResult {
  uint64_t total = 0, equal = 0, bloom_greater = 0, ngram_greater = 0;
  Welford diff;
  TopPicks extreme;
  TopPicks ngram;
};

}  // namespace

absl::StatusOr<OverestimationStats> OverestimationExperiment(
    const std::vector<std::string>& names,
    std::shared_ptr<const BloomFamily> family, int threads) {
  const size_t n = names.size();
  const size_t words = (family->m() + 63) / 64;
  std::vector<EncodedName> enc(n);
  std::vector<uint64_t> bits(n * words, 0);
  for (size_t i = 0; i < n; ++i) {
    absl::StatusOr<BigramSet> set = Bigrams(names[i]);
    if (!set.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("name ", i, ": ", set.status().message()));
    }
    BloomFilter f(family);
    f.InsertBigrams(*set);
    std::copy(f.words().begin(), f.words().end(), bits.begin() + i * words);
    enc[i].codes = set->codes();
    enc[i].popcount = static_cast<uint32_t>(f.PopCount());
  }

  const int shards = std::max(ShardCount(n, threads), 1);
  std::vector<ShardResult> results(shards);
  ParallelFor(n, threads, [&](int shard, size_t begin, size_t end) {
    ShardResult& r = results[shard];
    for (size_t i = begin; i < end; ++i) {
      const uint64_t* wi = &bits[i * words];
      const EncodedName& a = enc[i];
      for (size_t j = i + 1; j < n; ++j) {
        const uint64_t* wj = &bits[j * words];
        const EncodedName& b = enc[j];
        uint64_t both = 0;
        for (size_t w = 0; w < words; ++w) both += std::popcount(wi[w] & wj[w]);
        uint64_t common = 0;
        for (size_t x = 0, y = 0; x < a.codes.size() && y < b.codes.size();) {
          if (a.codes[x] < b.codes[y]) {
            ++x;
          } else if (b.codes[y] < a.codes[x]) {
            ++y;
          } else {
            ++common;
            ++x;
            ++y;
          }
        }
        const uint64_t bloom_den = a.popcount + b.popcount;
        const uint64_t plain_den = a.codes.size() + b.codes.size();
        // Exact comparison of 2*both/bloom_den against 2*common/plain_den.
        const uint64_t lhs = both * plain_den;
        const uint64_t rhs = common * bloom_den;
        ++r.total;
        const double bloom =
            2.0 * static_cast<double>(both) / static_cast<double>(bloom_den);
        const double plain =
            2.0 * static_cast<double>(common) / static_cast<double>(plain_den);
        if (lhs == rhs) {
          ++r.equal;
        } else if (lhs > rhs) {
          ++r.bloom_greater;
          r.diff.Add(bloom - plain);
        } else {
          ++r.ngram_greater;
          if (r.ngram.Wants(plain - bloom)) {
            r.ngram.Offer({plain - bloom, bloom, plain,
                           static_cast<uint32_t>(i), static_cast<uint32_t>(j)});
          }
        }
        if (common == 0 && r.extreme.Wants(bloom)) {
          r.extreme.Offer({bloom, bloom, plain, static_cast<uint32_t>(i),
                           static_cast<uint32_t>(j)});
        }
      }
    }
  });

  OverestimationStats stats;
  TopPicks extreme, ngram;
  for (const ShardResult& r : results) {
    stats.total_comparisons += r.total;
    stats.equal_count += r.equal;
    stats.bloom_greater_count += r.bloom_greater;
    stats.ngram_greater_count += r.ngram_greater;
    stats.diff.Merge(r.diff);
    extreme.Merge(r.extreme);
    ngram.Merge(r.ngram);
  }
  for (const PairPick& p : extreme.picks()) {
    stats.extreme_examples.push_back({p.bloom, p.ngram, names[p.i], names[p.j]});
  }
  for (const PairPick& p : ngram.picks()) {
    stats.ngram_greater_examples.push_back(
        {p.bloom, p.ngram, names[p.i], names[p.j]});
  }
  return stats;
}

SweepConfig DefaultSweepConfig() {
  SweepConfig c;
  for (uint64_t m = 100; m <= 1000; m += 100) c.sizes.push_back(m);
  for (uint32_t k = 3; k <= 30; k += 3) c.ks.push_back(k);
  return c;
}

absl::StatusOr<std::vector<SweepRow>> ParameterSweep(
    const std::vector<std::string>& names, const SweepConfig& config,
    uint64_t seed, int threads) {
  std::vector<std::pair<uint64_t, uint32_t>> points;
  for (uint64_t m : config.sizes) points.emplace_back(m, config.fixed_k);
  for (uint32_t k : config.ks) {
    // The two axes may cross; run the shared point once.
    if (std::find(points.begin(), points.end(),
                  std::make_pair(config.fixed_m, k)) == points.end()) {
      points.emplace_back(config.fixed_m, k);
    }
  }
  std::vector<SweepRow> rows;
  for (auto [m, k] : points) {
    std::vector<std::shared_ptr<const BloomFamily>> families;
    if (config.include_double) {
      DoubleHashParams params;
      params.m = m;
      params.k = k;
      params.hash_pair = config.hash_pair;
      absl::StatusOr<BloomFamily> f = BloomFamily::DoubleHash(params);
      if (!f.ok()) return f.status();
      families.push_back(std::make_shared<const BloomFamily>(*std::move(f)));
    }
    if (config.include_universal) {
      std::mt19937_64 rng =
          MakeRng(seed, absl::StrCat("sweep:universal:", m, ":", k));
      absl::StatusOr<BloomFamily> f = BloomFamily::Universal(m, k, rng);
      if (!f.ok()) return f.status();
      families.push_back(std::make_shared<const BloomFamily>(*std::move(f)));
    }
    for (const auto& family : families) {
      absl::StatusOr<OverestimationStats> stats =
          OverestimationExperiment(names, family, threads);
      if (!stats.ok()) return stats.status();
      rows.push_back({family->Describe(), m, k, *std::move(stats)});
    }
  }
  return rows;
}

std::string SweepCsvRow(const SweepRow& row) {
  const OverestimationStats& s = row.stats;
  return absl::StrFormat("%s,%d,%d,%d,%.4f,%.4f,%.6f,%.6f", row.family, row.m,
                         row.k, s.total_comparisons, 100.0 * s.equal_fraction(),
                         100.0 * s.bloom_greater_fraction(), s.diff.mean(),
                         s.diff.stddev());
}

std::vector<std::string> SampleNames(const std::vector<std::string>& names,
                                     size_t n, uint64_t seed) {
  std::vector<std::string> pool = names;
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  std::mt19937_64 rng = MakeRng(seed, "sample-names");
  std::shuffle(pool.begin(), pool.end(), rng);
  if (pool.size() > n) pool.resize(n);
  return pool;
}

}  // namespace pprl
