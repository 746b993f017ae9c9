#pragma once

#include "ece/corpus.hpp"
#include "ece/corpus_io.hpp"
#include "ece/cross_validation.hpp"
#include "ece/crf.hpp"
#include "ece/encoding.hpp"
#include "ece/experiment.hpp"
#include "ece/features.hpp"
#include "ece/folds.hpp"
#include "ece/generator.hpp"
#include "ece/kernel.hpp"
#include "ece/lbfgs.hpp"
#include "ece/margin.hpp"
#include "ece/metrics.hpp"
#include "ece/ranking.hpp"
#include "ece/reference_tables.hpp"
#include "ece/report.hpp"
#include "ece/rng.hpp"
#include "ece/significance.hpp"
#include "ece/tasks.hpp"
