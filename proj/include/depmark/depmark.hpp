// Umbrella header.
#ifndef DEPMARK_DEPMARK_HPP
#define DEPMARK_DEPMARK_HPP

#include "analysis.hpp"
#include "error.hpp"
#include "lang.hpp"
#include "linalg.hpp"
#include "model.hpp"
#include "random.hpp"
#include "rate_expr.hpp"
#include "simulate.hpp"
#include "solver.hpp"
#include "validate.hpp"

namespace depmark {
inline constexpr const char* kVersion = "0.1.0";
}

#endif  // DEPMARK_DEPMARK_HPP
