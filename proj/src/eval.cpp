#include "framepick/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace framepick {

MatchResult match_peaks(std::span<const Peak> detected, std::span<const Peak> reference,
                        double rel_tol) {
    if (!(rel_tol > 0.0)) throw ValidationError("match_peaks: rel_tol must be positive");

    std::vector<std::size_t> order(detected.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (detected[a].score != detected[b].score) return detected[a].score > detected[b].score;
        return detected[a].mz < detected[b].mz;
    });

    MatchResult out;
    std::vector<char> ref_taken(reference.size(), 0);
    for (std::size_t d : order) {
        std::size_t best = reference.size();
        double best_dist = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < reference.size(); ++r) {
            if (ref_taken[r]) continue;
            const double dist = std::abs(detected[d].mz - reference[r].mz);
            if (dist <= rel_tol * reference[r].mz && dist < best_dist) {
                best_dist = dist;
                best = r;
            }
        }
        if (best < reference.size()) {
            ref_taken[best] = 1;
            out.matches.emplace_back(d, best);
        } else {
            out.unmatched_detected.push_back(d);
        }
    }
    for (std::size_t r = 0; r < reference.size(); ++r) {
        if (!ref_taken[r]) out.unmatched_reference.push_back(r);
    }
    return out;
}

SpectrumScore score_counts(std::size_t n_correct, std::size_t n_detected, std::size_t n_reference) {
    if (n_correct > n_detected || n_correct > n_reference) {
        throw ValidationError("score: inconsistent counts");
    }
    SpectrumScore s;
    s.n_reference = n_reference;
    s.n_detected = n_detected;
    s.n_correct = n_correct;

    if (n_reference == 0) {
        s.sensitivity = n_detected == 0 ? 1.0 : 0.0;
    } else {
        s.sensitivity = static_cast<double>(n_correct) / static_cast<double>(n_reference);
    }
    s.fdr = n_detected == 0
                ? 0.0
                : static_cast<double>(n_detected - n_correct) / static_cast<double>(n_detected);

    const double precision = 1.0 - s.fdr;
    const double denom = precision + s.sensitivity;
    s.f1 = denom == 0.0 ? 0.0 : 2.0 * precision * s.sensitivity / denom;
    return s;
}

SpectrumScore score_match(const MatchResult& match, std::size_t n_detected,
                          std::size_t n_reference) {
    return score_counts(match.matches.size(), n_detected, n_reference);
}

EvalReport score(std::vector<SpectrumScore> per_spectrum) {
    EvalReport rep;
    rep.per_spectrum = std::move(per_spectrum);

    for (const SpectrumScore& s : rep.per_spectrum) {
        rep.n_reference += s.n_reference;
        rep.n_detected += s.n_detected;
        rep.n_correct += s.n_correct;
        rep.mean_sensitivity += s.sensitivity;
        rep.mean_fdr += s.fdr;
        rep.mean_f1 += s.f1;
    }
    rep.n_false = rep.n_detected - rep.n_correct;

    const SpectrumScore pooled = score_counts(rep.n_correct, rep.n_detected, rep.n_reference);
    rep.sensitivity = pooled.sensitivity;
    rep.fdr = pooled.fdr;
    rep.f1 = pooled.f1;

    if (!rep.per_spectrum.empty()) {
        const double inv = 1.0 / static_cast<double>(rep.per_spectrum.size());
        rep.mean_sensitivity *= inv;
        rep.mean_fdr *= inv;
        rep.mean_f1 *= inv;
    }
    return rep;
}

} // namespace framepick
