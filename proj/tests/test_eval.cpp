#include <doctest.h>

#include <algorithm>
#include <vector>

#include "framepick/eval.hpp"
#include "framepick/rng.hpp"

using namespace framepick;

namespace {

Peak p(double mz, double score = 1.0) { return {0, mz, score}; }

} // namespace

TEST_CASE("identical lists match completely") {
    const std::vector<Peak> peaks{p(100.0), p(200.0), p(350.0)};
    const MatchResult m = match_peaks(peaks, peaks, 0.01);
    CHECK(m.matches.size() == 3);
    CHECK(m.unmatched_detected.empty());
    CHECK(m.unmatched_reference.empty());
}

TEST_CASE("the 1% tolerance boundary is inclusive") {
    const std::vector<Peak> detected{p(101.0)};
    const std::vector<Peak> reference{p(100.0)};
    CHECK(match_peaks(detected, reference, 0.01).matches.size() == 1);

    const std::vector<Peak> too_far{p(101.0000001)};
    CHECK(match_peaks(too_far, reference, 0.01).matches.empty());
}

TEST_CASE("two detections near one reference: the stronger wins, the other is false") {
    const std::vector<Peak> detected{p(100.2, 3.0), p(99.9, 5.0)};
    const std::vector<Peak> reference{p(100.0)};
    const MatchResult m = match_peaks(detected, reference, 0.01);
    REQUIRE(m.matches.size() == 1);
    CHECK(m.matches[0].first == 1); // the score-5 detection
    REQUIRE(m.unmatched_detected.size() == 1);
    CHECK(m.unmatched_detected[0] == 0);
}

TEST_CASE("each detection takes the nearest free reference") {
    const std::vector<Peak> detected{p(100.4, 2.0), p(100.0, 1.0)};
    const std::vector<Peak> reference{p(100.5), p(99.9)};
    const MatchResult m = match_peaks(detected, reference, 0.01);
    REQUIRE(m.matches.size() == 2);
    // sorted by score: detection 0 first -> nearest is reference 0 (0.1 away)
    CHECK(m.matches[0] == std::pair<std::size_t, std::size_t>{0, 0});
    CHECK(m.matches[1] == std::pair<std::size_t, std::size_t>{1, 1});
}

TEST_CASE("matching is invariant to reference order") {
    Rng rng(51);
    std::vector<Peak> detected;
    std::vector<Peak> reference;
    for (int i = 0; i < 30; ++i) {
        const double mz = rng.uniform(100.0, 10000.0);
        reference.push_back(p(mz));
        if (i % 3 != 0) detected.push_back(p(mz * rng.uniform(0.995, 1.005), rng.uniform(0.1, 9.0)));
    }
    std::vector<Peak> shuffled = reference;
    std::reverse(shuffled.begin(), shuffled.end());
    const MatchResult a = match_peaks(detected, reference, 0.01);
    const MatchResult b = match_peaks(detected, shuffled, 0.01);
    CHECK(a.matches.size() == b.matches.size());
    CHECK(a.unmatched_detected == b.unmatched_detected);
}

TEST_CASE("score formulas: hand-computed cases") {
    // 8 correct of 10 reference, 8 detected, none false
    const SpectrumScore a = score_counts(8, 8, 10);
    CHECK(a.sensitivity == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(a.fdr == 0.0);
    CHECK(a.f1 == doctest::Approx(2.0 * 1.0 * 0.8 / 1.8).epsilon(1e-12));

    // sensitivity 0.9, fdr 0.2 -> f1 = 2*0.8*0.9/1.7
    const SpectrumScore b = score_counts(36, 45, 40);
    CHECK(b.sensitivity == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(b.fdr == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(b.f1 == doctest::Approx(2.0 * 0.8 * 0.9 / 1.7).epsilon(1e-12));

    // perfect detection
    const SpectrumScore c = score_counts(10, 10, 10);
    CHECK(c.sensitivity == 1.0);
    CHECK(c.fdr == 0.0);
    CHECK(c.f1 == 1.0);
}

TEST_CASE("score degenerate conventions") {
    const SpectrumScore empty_both = score_counts(0, 0, 0);
    CHECK(empty_both.sensitivity == 1.0);
    CHECK(empty_both.fdr == 0.0);

    const SpectrumScore spurious = score_counts(0, 3, 0);
    CHECK(spurious.sensitivity == 0.0);
    CHECK(spurious.fdr == 1.0);
    CHECK(spurious.f1 == 0.0);

    const SpectrumScore missed = score_counts(0, 0, 5);
    CHECK(missed.sensitivity == 0.0);
    CHECK(missed.fdr == 0.0);
    CHECK(missed.f1 == 0.0);

    CHECK_THROWS_AS(score_counts(5, 3, 10), ValidationError);
}

TEST_CASE("f1 is the harmonic mean of precision and sensitivity") {
    Rng rng(53);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n_ref = 1 + rng.next_u64() % 50;
        const std::size_t n_det = 1 + rng.next_u64() % 50;
        const std::size_t n_cor = rng.next_u64() % (std::min(n_ref, n_det) + 1);
        const SpectrumScore s = score_counts(n_cor, n_det, n_ref);
        const double precision = 1.0 - s.fdr;
        if (precision + s.sensitivity > 0.0) {
            const double harmonic = 2.0 / (1.0 / std::max(precision, 1e-300) +
                                           1.0 / std::max(s.sensitivity, 1e-300));
            if (precision > 0.0 && s.sensitivity > 0.0) {
                CHECK(s.f1 == doctest::Approx(harmonic).epsilon(1e-12));
            } else {
                CHECK(s.f1 == 0.0);
            }
        }
        // symmetry in (precision, sensitivity)
        const double swapped = precision + s.sensitivity == 0.0
                                   ? 0.0
                                   : 2.0 * s.sensitivity * precision / (s.sensitivity + precision);
        CHECK(s.f1 == doctest::Approx(swapped).epsilon(1e-12));
    }
}

TEST_CASE("a spurious detection never helps") {
    const SpectrumScore base = score_counts(7, 9, 10);
    const SpectrumScore more = score_counts(7, 10, 10);
    CHECK(more.sensitivity == base.sensitivity);
    CHECK(more.fdr >= base.fdr);
}

TEST_CASE("report aggregation pools counts and averages per-spectrum scores") {
    std::vector<SpectrumScore> scores;
    scores.push_back(score_counts(8, 8, 10));
    scores.push_back(score_counts(5, 10, 10));
    const EvalReport rep = score(std::move(scores));
    CHECK(rep.n_reference == 20);
    CHECK(rep.n_detected == 18);
    CHECK(rep.n_correct == 13);
    CHECK(rep.n_false == 5);
    CHECK(rep.sensitivity == doctest::Approx(13.0 / 20.0).epsilon(1e-12));
    CHECK(rep.fdr == doctest::Approx(5.0 / 18.0).epsilon(1e-12));
    CHECK(rep.mean_sensitivity ==
          doctest::Approx(0.5 * (0.8 + 0.5)).epsilon(1e-12));
    CHECK(rep.per_spectrum.size() == 2);
    // pooled f1 consistent with the formula
    const double prec = 1.0 - rep.fdr;
    CHECK(rep.f1 == doctest::Approx(2.0 * prec * rep.sensitivity / (prec + rep.sensitivity))
                        .epsilon(1e-12));
}
