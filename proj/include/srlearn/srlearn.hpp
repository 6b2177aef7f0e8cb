#pragma once

#include "srlearn/aol.hpp"
#include "srlearn/data.hpp"
#include "srlearn/error.hpp"
#include "srlearn/eval/benchmark.hpp"
#include "srlearn/eval/cv_tune.hpp"
#include "srlearn/eval/metrics.hpp"
#include "srlearn/kernels.hpp"
#include "srlearn/parallel.hpp"
#include "srlearn/simgen.hpp"
#include "srlearn/solvers/logistic.hpp"
#include "srlearn/solvers/ols.hpp"
#include "srlearn/solvers/simplex.hpp"
#include "srlearn/solvers/wsvm_dual.hpp"
#include "srlearn/sr.hpp"
#include "srlearn/varselect.hpp"
