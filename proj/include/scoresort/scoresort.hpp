#ifndef SCORESORT_SCORESORT_HPP
#define SCORESORT_SCORESORT_HPP

#include "scoresort/bench.hpp"
#include "scoresort/common.hpp"
#include "scoresort/dataset.hpp"
#include "scoresort/graph.hpp"
#include "scoresort/kernels.hpp"
#include "scoresort/metrics.hpp"
#include "scoresort/ordering.hpp"
#include "scoresort/scm.hpp"
#include "scoresort/score_matching.hpp"

#endif  // SCORESORT_SCORESORT_HPP
