#pragma once

#include "soda/glm.hpp"
#include "soda/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace soda {

struct TraceRecord {
    enum class Action { Add, Remove };
    int stage = 0;
    Action action = Action::Add;
    // Stage 1 and 3 steps act on a term; stage 2 steps act on a predictor.
    std::optional<Term> term;
    int predictor = 0;
    double ebic_before = 0.0;
    double ebic_after = 0.0;
    bool improved_best = false;  // false for forced continuation steps
};

struct SelectionResult {
    TermSet selected;                 // final term set S~
    std::vector<int> predictors;      // predictors_of(selected)
    std::vector<TraceRecord> trace;
    double gamma_used = 0.5;
    long fits_evaluated = 0;
    long fits_stage1 = 0;
    long fits_stage2 = 0;
    long fits_stage3 = 0;
    TermSet stage1_mains;             // M~_F
    std::vector<int> stage2_predictors;  // C~_F
    double final_ebic = 0.0;
    double final_loglik = 0.0;
};

// Stage 1: greedy forward main-effect selection by EBIC, with the p_f
// continuation; returns the best-EBIC set seen.
TermSet stage1_preliminary(const Dataset& data, const SelectionConfig& cfg,
                           SelectionResult* accum = nullptr);

// Stage 2: forward predictor addition scoring each candidate j by the EBIC of
// the full induced set M~_F u C u {j} u (C u {j})^2.
std::vector<int> stage2_forward(const Dataset& data, const TermSet& m_f,
                                const SelectionConfig& cfg, SelectionResult* accum = nullptr);

// Stage 3: backward elimination of individual terms, no hierarchy constraint.
TermSet stage3_backward(const Dataset& data, const TermSet& s_start, const SelectionConfig& cfg,
                        SelectionResult* accum = nullptr);

// Stages 1 -> 2 -> 3.
SelectionResult soda_select(const Dataset& data, const SelectionConfig& cfg);

// 10-fold CV over an EBIC gamma grid; ties go to the larger (sparser) gamma.
// Folds are stratified by class and derived deterministically from the seed.
double cv_select_gamma(const Dataset& data, const std::vector<double>& grid, int folds,
                       const SelectionConfig& cfg, uint64_t seed = 0);

}  // namespace soda
