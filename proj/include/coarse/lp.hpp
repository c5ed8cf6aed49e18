#pragma once

#include "coarse/lp_exact.hpp"
#include "coarse/lp_model.hpp"
#include "coarse/lp_revised.hpp"

namespace coarse::lp {

inline Solution solve_lp(const LPInstance& lp, NumericMode mode, const SolveOptions& opt = {}) {
  return mode == NumericMode::Exact ? solve_exact(lp, opt) : solve_float(lp, opt);
}

inline Solution solve_lp(const LPInstance& lp) { return solve_exact(lp); }

}  // namespace coarse::lp
