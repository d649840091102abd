#include "apartmentlab/apartments.hpp"

#include <algorithm>

#include "apartmentlab/error.hpp"

namespace apartmentlab {

namespace {

// Number of distinct arrangements of a multiset with the given counts.
std::uint64_t multinomial(const std::vector<int>& counts) {
  std::uint64_t total = 1;
  int placed = 0;
  for (int c : counts) {
    for (int j = 1; j <= c; ++j) {
      ++placed;
      total = total * static_cast<std::uint64_t>(placed) / static_cast<std::uint64_t>(j);
    }
  }
  return total;
}

}  // namespace

PairIndex PairIndex::make(int a, int b) {
  if (a == b) throw Error(ErrorCode::EqualPairs, "pair indices must be distinct");
  return a < b ? PairIndex{a, b} : PairIndex{b, a};
}

std::vector<PairIndex> all_pairs(int n) {
  std::vector<PairIndex> out;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out.push_back({i, j});
  return out;
}

void for_each_partition(const ClassSpec& spec, const std::function<void(const LabeledPartition&)>& visit,
                        std::uint64_t cap) {
  const std::uint64_t total = apartment_size(spec);
  if (total > cap)
    throw Error(ErrorCode::CapExceeded, "apartment has " + std::to_string(total) +
                                            " operators, cap is " + std::to_string(cap));
  // The lexicographically smallest slot vector is sorted ascending;
  // next_permutation then walks the multiset permutations in order.
  LabeledPartition p;
  for (int s = 0; s < spec.num_slots(); ++s)
    p.slot_of.insert(p.slot_of.end(), static_cast<std::size_t>(spec.slot_size(s)), s);
  do {
    visit(p);
  } while (std::next_permutation(p.slot_of.begin(), p.slot_of.end()));
}

std::vector<LabeledPartition> enumerate_apartment(const ClassSpec& spec, std::uint64_t cap) {
  std::vector<LabeledPartition> out;
  out.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(apartment_size(spec), cap)));
  for_each_partition(spec, [&](const LabeledPartition& p) { out.push_back(p); }, cap);
  return out;
}

bool in_a_ij(const LabeledPartition& p, PairIndex pair) {
  return p.slot_of.at(static_cast<std::size_t>(pair.i)) == p.slot_of.at(static_cast<std::size_t>(pair.j));
}

std::vector<PairIndex> fused_pairs(std::span<const LabeledPartition> subset) {
  if (subset.empty()) throw Error(ErrorCode::EmptySubset, "fused_pairs of the empty subset is undefined");
  const int n = subset.front().dim();
  std::vector<PairIndex> out;
  for (const auto& pair : all_pairs(n)) {
    const bool fused = std::all_of(subset.begin(), subset.end(),
                                   [&](const LabeledPartition& p) { return in_a_ij(p, pair); });
    if (fused) out.push_back(pair);
  }
  return out;
}

std::vector<LabeledPartition> a_ij_members(std::span<const LabeledPartition> apartment, PairIndex pair) {
  std::vector<LabeledPartition> out;
  for (const auto& p : apartment)
    if (in_a_ij(p, pair)) out.push_back(p);
  return out;
}

MaximalInexactReport maximal_inexact_subsets(const ClassSpec& spec, std::uint64_t cap) {
  const auto apartment = enumerate_apartment(spec, cap);
  const auto n = static_cast<std::size_t>(spec.dim());
  MaximalInexactReport report;
  for (const auto& pair : all_pairs(spec.dim())) {
    // Intersect fused tables over A_ij; then every outside P must separate
    // every surviving pair.
    std::vector<std::vector<char>> common(n, std::vector<char>(n, 1));
    std::uint64_t members = 0;
    for (const auto& p : apartment) {
      if (!in_a_ij(p, pair)) continue;
      ++members;
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
          common[a][b] = common[a][b] && p.slot_of[a] == p.slot_of[b];
    }
    if (members == 0) {
      report.empty_pairs.push_back(pair);
      continue;
    }
    bool maximal = true;
    for (const auto& p : apartment) {
      if (in_a_ij(p, pair)) continue;
      for (std::size_t a = 0; a < n && maximal; ++a)
        for (std::size_t b = a + 1; b < n && maximal; ++b)
          if (common[a][b] && p.slot_of[a] == p.slot_of[b]) maximal = false;
      if (!maximal) break;
    }
    report.subsets.push_back({pair, members, maximal});
  }
  return report;
}

bool adjacent(PairIndex a, PairIndex b) {
  if (a == b) throw Error(ErrorCode::EqualPairs, "adjacency is defined for distinct pairs");
  const int shared = static_cast<int>(b.contains(a.i)) + static_cast<int>(b.contains(a.j));
  return shared == 1;
}

bool PairFamily::contains(PairIndex p) const {
  return std::binary_search(pairs.begin(), pairs.end(), p);
}

PairFamily pair_family(const ClassSpec& spec, const LabeledPartition& p, const LabeledPartition& q) {
  validate_partition(spec, p);
  try {
    validate_partition(spec, q);
  } catch (const Error&) {
    throw Error(ErrorCode::SpecMismatch, "operators belong to different classes");
  }
  PairFamily family{p, q, {}};
  for (const auto& pair : all_pairs(spec.dim()))
    if (!in_a_ij(p, pair) && !in_a_ij(q, pair)) family.pairs.push_back(pair);
  return family;
}

std::vector<SpecialSubfamily> special_subfamilies(const PairFamily& family) {
  const int n = family.first.dim();
  std::vector<SpecialSubfamily> candidates;

  for (int x = 0; x < n; ++x) {
    SpecialSubfamily star{{}, SubfamilyKind::Star, x};
    for (const auto& p : family.pairs)
      if (p.contains(x)) star.pairs.push_back(p);
    if (star.pairs.empty()) continue;
    const bool duplicate = std::any_of(candidates.begin(), candidates.end(),
                                       [&](const SpecialSubfamily& c) { return c.pairs == star.pairs; });
    if (!duplicate) candidates.push_back(std::move(star));
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (!family.contains({i, j})) continue;
      for (int t = j + 1; t < n; ++t)
        if (family.contains({i, t}) && family.contains({j, t}))
          candidates.push_back({{{i, j}, {i, t}, {j, t}}, SubfamilyKind::Triangle, -1});
    }

  std::vector<SpecialSubfamily> maximal;
  for (const auto& c : candidates) {
    const bool dominated = std::any_of(candidates.begin(), candidates.end(), [&](const SpecialSubfamily& d) {
      return d.pairs.size() > c.pairs.size() &&
             std::includes(d.pairs.begin(), d.pairs.end(), c.pairs.begin(), c.pairs.end());
    });
    if (!dominated) maximal.push_back(c);
  }
  std::sort(maximal.begin(), maximal.end(),
            [](const SpecialSubfamily& a, const SpecialSubfamily& b) { return a.pairs < b.pairs; });
  return maximal;
}

int intersection_size(const SpecialSubfamily& a, const SpecialSubfamily& b) {
  std::vector<PairIndex> common;
  std::set_intersection(a.pairs.begin(), a.pairs.end(), b.pairs.begin(), b.pairs.end(),
                        std::back_inserter(common));
  return static_cast<int>(common.size());
}

const char* case_name(PairCase c) noexcept {
  switch (c) {
    case PairCase::Orthogonal: return "orthogonal";
    case PairCase::Case2: return "case2";
    case PairCase::Case3: return "case3";
  }
  return "unknown";
}

PairCase classify_pair(const LabeledPartition& p, const LabeledPartition& q) {
  if (p.dim() != q.dim()) throw Error(ErrorCode::SpecMismatch, "operators differ in dimension");
  if (p == q) throw Error(ErrorCode::EqualPairs, "classify_pair needs distinct operators");
  const auto sp = p.support();
  const auto sq = q.support();
  if (sp == sq) return PairCase::Case3;
  std::vector<int> common;
  std::set_intersection(sp.begin(), sp.end(), sq.begin(), sq.end(), std::back_inserter(common));
  return common.empty() ? PairCase::Orthogonal : PairCase::Case2;
}

std::optional<LabeledPartition> check_rotated_frame_witness(const ClassSpec& spec, const Basis& basis,
                                                            std::span<const LabeledPartition> apartment,
                                                            PairIndex pair, double theta) {
  const Basis rotated = rotated_frame(basis, pair.i, pair.j, theta);
  for (const auto& p : apartment) {
    const HermitianOperator op = build_operator(basis, p, spec);
    bool in_rotated = true;
    try {
      recover_partition(op, rotated, spec, tol::predicate);
    } catch (const Error&) {
      in_rotated = false;
    }
    if (in_rotated != in_a_ij(p, pair)) return p;
  }
  return std::nullopt;
}

bool subset_fits_rotated_frame(const ClassSpec& spec, const Basis& basis,
                               std::span<const LabeledPartition> subset, PairIndex pair, double theta) {
  const Basis rotated = rotated_frame(basis, pair.i, pair.j, theta);
  for (const auto& p : subset) {
    try {
      recover_partition(build_operator(basis, p, spec), rotated, spec, tol::predicate);
    } catch (const Error&) {
      return false;
    }
  }
  return true;
}

std::uint64_t partition_rank(const ClassSpec& spec, const LabeledPartition& p) {
  validate_partition(spec, p);
  std::vector<int> counts(static_cast<std::size_t>(spec.num_slots()));
  for (int s = 0; s < spec.num_slots(); ++s) counts[static_cast<std::size_t>(s)] = spec.slot_size(s);
  std::uint64_t rank = 0;
  for (int s : p.slot_of) {
    for (int v = 0; v < s; ++v) {
      auto& c = counts[static_cast<std::size_t>(v)];
      if (c == 0) continue;
      --c;
      rank += multinomial(counts);
      ++c;
    }
    --counts[static_cast<std::size_t>(s)];
  }
  return rank;
}

}  // namespace apartmentlab
