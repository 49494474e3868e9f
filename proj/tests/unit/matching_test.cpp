#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"
#include "vprbench/matching.hpp"

using namespace vpr;

namespace {

SimilarityMatrix matrix_of(std::size_t nq, std::size_t nr, std::vector<double> scores) {
  SimilarityMatrix m;
  m.n_queries = nq;
  m.n_refs = nr;
  m.scores = std::move(scores);
  return m;
}

GroundTruth identity_gt(std::size_t n) {
  GroundTruth gt;
  for (std::size_t i = 0; i < n; ++i) gt.ref_for_query.push_back(i);
  return gt;
}

std::vector<Descriptor> random_globals(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<Descriptor> out;
  for (std::size_t i = 0; i < n; ++i) {
    GlobalDescriptor g;
    for (std::size_t k = 0; k < dim; ++k) g.values.push_back(d(rng));
    out.emplace_back(std::move(g));
  }
  return out;
}

ErrorCode gt_error(const test::TempDir& dir, const std::string& text, std::size_t nq, std::size_t nr) {
  test::write_text(dir / "gt.csv", text);
  try {
    read_ground_truth(dir / "gt.csv", nq, nr);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

}  // namespace

TEST(L1Similarity, Examples) {
  const std::vector<double> a{1, 2}, b{3, 1}, z{0, 0}, f{0, 5};
  EXPECT_EQ(l1_similarity(a, a), 0.0);
  EXPECT_EQ(l1_similarity(a, b), -3.0);
  EXPECT_EQ(l1_similarity(z, f), -5.0);
  EXPECT_THROW(l1_similarity(a, std::vector<double>{1}), Error);
}

TEST(SimilarityMatrix, SingleIdenticalPair) {
  const std::vector<Descriptor> q{GlobalDescriptor{{1, 2, 3}}};
  const auto m = similarity_matrix(q, q, Metric::Cosine);
  ASSERT_EQ(m.scores.size(), 1u);
  EXPECT_DOUBLE_EQ(m.at(0, 0), 1.0);
}

TEST(SimilarityMatrix, SelfSimilarityDiagonal) {
  std::mt19937_64 rng(3);
  const auto d = random_globals(rng, 3, 10);
  const auto m = similarity_matrix(d, d, Metric::Cosine);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(m.at(i, i), 1.0, 1e-12);
}

TEST(SimilarityMatrix, EqualsNaiveDoubleLoop) {
  std::mt19937_64 rng(99);
  for (Metric metric : {Metric::Cosine, Metric::L1}) {
    const auto q = random_globals(rng, 4, 16);
    const auto r = random_globals(rng, 5, 16);
    const auto m = similarity_matrix(q, r, metric);
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 5; ++j) {
        const auto& a = std::get<GlobalDescriptor>(q[i]).values;
        const auto& b = std::get<GlobalDescriptor>(r[j]).values;
        double expect;
        if (metric == Metric::L1) {
          expect = 0.0;
          for (std::size_t k = 0; k < a.size(); ++k) expect += std::abs(a[k] - b[k]);
          expect = -expect;
        } else {
          expect = cosine_similarity(a, b);
        }
        EXPECT_EQ(m.at(i, j), expect);
      }
    }
  }
}

TEST(SimilarityMatrix, WorkerCountDoesNotChangeScores) {
  std::mt19937_64 rng(5);
  const auto q = random_globals(rng, 13, 32);
  const auto r = random_globals(rng, 17, 32);
  const auto one = similarity_matrix(q, r, Metric::Cosine, 1);
  for (std::size_t w : {2u, 3u, 8u, 64u}) EXPECT_EQ(similarity_matrix(q, r, Metric::Cosine, w).scores, one.scores);
}

TEST(SimilarityMatrix, KindMismatch) {
  std::vector<Descriptor> mixed{GlobalDescriptor{{1, 0}}, RegionalDescriptorSet{}};
  const std::vector<Descriptor> g{GlobalDescriptor{{1, 0}}};
  try {
    similarity_matrix(g, mixed, Metric::Cosine);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::KindMismatch);
  }
  try {
    similarity_matrix(g, g, Metric::Regional);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::KindMismatch);
  }
}

TEST(SimilarityMatrix, RegionalUsesCohogMatch) {
  RegionalDescriptorSet a;
  a.regions.push_back({Rect{0, 0, 16, 16}, GlobalDescriptor{{1, 0}}});
  RegionalDescriptorSet b;
  b.regions.push_back({Rect{0, 0, 16, 16}, GlobalDescriptor{{0.6, 0.8}}});
  const std::vector<Descriptor> q{a}, r{a, b};
  const auto m = similarity_matrix(q, r, Metric::Regional);
  EXPECT_DOUBLE_EQ(m.at(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(m.at(0, 1), cohog_match(a, b));
}

TEST(ParallelFor, PropagatesWorkerExceptions) {
  EXPECT_THROW(parallel_for(10, 4, [](std::size_t i) {
                 if (i == 7) throw Error(ErrorCode::DimMismatch, "boom");
               }),
               Error);
}

TEST(EvaluateMatches, IdentityMatrix) {
  const auto out = evaluate_matches(matrix_of(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1}), identity_gt(3));
  EXPECT_EQ(out.matches_list, (std::vector<std::uint8_t>{1, 1, 1}));
  EXPECT_EQ(out.accuracy, 1.0);
}

TEST(EvaluateMatches, SharedBestReference) {
  const auto out = evaluate_matches(matrix_of(2, 2, {0.9, 0.1, 0.8, 0.2}), identity_gt(2));
  EXPECT_EQ(out.best_indices, (std::vector<std::size_t>{0, 0}));
  EXPECT_EQ(out.matches_list, (std::vector<std::uint8_t>{1, 0}));
  EXPECT_EQ(out.accuracy, 0.5);
}

TEST(EvaluateMatches, TiesGoToLowestIndex) {
  const auto out = evaluate_matches(matrix_of(2, 2, {0.5, 0.5, 0.5, 0.5}), identity_gt(2));
  EXPECT_EQ(out.best_indices, (std::vector<std::size_t>{0, 0}));
  EXPECT_EQ(out.matches_list, (std::vector<std::uint8_t>{1, 0}));
  EXPECT_EQ(out.accuracy, 0.5);
}

TEST(EvaluateMatches, Tolerance) {
  GroundTruth gt{{2, 2}, 1};
  const auto out = evaluate_matches(matrix_of(2, 5, {0, 1, 0, 0, 0, 0, 0, 0, 0, 1}), gt);
  EXPECT_EQ(out.matches_list, (std::vector<std::uint8_t>{1, 0}));
}

TEST(EvaluateMatches, CoverageMismatch) { EXPECT_THROW(evaluate_matches(matrix_of(2, 2, {1, 0, 0, 1}), identity_gt(3)), Error); }

TEST(EvaluateMatches, Properties) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> size(1, 9);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t nq = static_cast<std::size_t>(size(rng)), nr = static_cast<std::size_t>(size(rng));
    std::vector<double> s(nq * nr);
    // coarse values so ties are common
    for (double& v : s) v = std::round(u(rng) * 3.0) / 3.0;
    GroundTruth gt;
    std::uniform_int_distribution<std::size_t> ref(0, nr - 1);
    for (std::size_t i = 0; i < nq; ++i) gt.ref_for_query.push_back(ref(rng));
    const auto m = matrix_of(nq, nr, s);
    const auto a = evaluate_matches(m, gt);
    const auto b = evaluate_matches(m, gt);
    EXPECT_EQ(a.matches_list, b.matches_list);
    EXPECT_EQ(a.best_indices, b.best_indices);
    EXPECT_GE(a.accuracy, 0.0);
    EXPECT_LE(a.accuracy, 1.0);
    const bool all = std::all_of(a.matches_list.begin(), a.matches_list.end(), [](auto x) { return x == 1; });
    EXPECT_EQ(a.accuracy == 1.0, all);

    // shift every entry of each row by a per-row constant
    auto shifted = m;
    for (std::size_t q = 0; q < nq; ++q) {
      const double c = std::round(u(rng) * 8.0) / 4.0;
      for (std::size_t r = 0; r < nr; ++r) shifted.scores[q * nr + r] += c;
    }
    EXPECT_EQ(evaluate_matches(shifted, gt).best_indices, a.best_indices);
  }
}

TEST(EvaluateMatches, CosineArgmaxSurvivesPositiveScaling) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> alpha(0.01, 100.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto q = random_globals(rng, 6, 12);
    const auto r = random_globals(rng, 7, 12);
    auto scale = [&](std::vector<Descriptor> ds) {
      for (auto& d : ds) {
        const double s = alpha(rng);
        for (double& v : std::get<GlobalDescriptor>(d).values) v *= s;
      }
      return ds;
    };
    const auto gt = GroundTruth{{0, 1, 2, 3, 4, 5}, 0};
    const auto base = evaluate_matches(similarity_matrix(q, r, Metric::Cosine), gt);
    const auto scaled = evaluate_matches(similarity_matrix(scale(q), scale(r), Metric::Cosine), gt);
    EXPECT_EQ(scaled.best_indices, base.best_indices);
  }
}

TEST(GroundTruthFile, ParsesAndValidates) {
  test::TempDir dir;
  test::write_text(dir / "gt.csv", "query_index,ref_index\n1,3\n0, 2\n\n");
  const GroundTruth gt = read_ground_truth(dir / "gt.csv", 2, 4, 1);
  EXPECT_EQ(gt.ref_for_query, (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(gt.tolerance, 1u);

  EXPECT_EQ(gt_error(dir, "query_index,ref_index\n0,7\n", 1, 4), ErrorCode::GroundTruthError);
  EXPECT_EQ(gt_error(dir, "query_index,ref_index\n0,1\n0,2\n", 2, 4), ErrorCode::GroundTruthError);
  EXPECT_EQ(gt_error(dir, "query_index,ref_index\n0,1\n", 2, 4), ErrorCode::GroundTruthError);
  EXPECT_EQ(gt_error(dir, "q,r\n0,1\n", 1, 4), ErrorCode::GroundTruthError);
  EXPECT_EQ(gt_error(dir, "query_index,ref_index\n0,x\n", 1, 4), ErrorCode::GroundTruthError);
  EXPECT_EQ(gt_error(dir, "query_index,ref_index\n5,1\n", 1, 4), ErrorCode::GroundTruthError);
  EXPECT_THROW(read_ground_truth(dir / "nope.csv", 1, 1), Error);
}

TEST(MetricNames, RoundTrip) {
  for (Metric m : {Metric::Cosine, Metric::L1, Metric::Regional}) EXPECT_EQ(parse_metric(to_string(m)), m);
  EXPECT_FALSE(parse_metric("euclid"));
}
