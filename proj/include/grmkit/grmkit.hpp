#pragma once

// Graphical representation model toolkit: sparse precision estimation,
// endogenous variance decomposition, factor and interaction baselines,
// out-of-sample evaluation, and partial-correlation graph analytics.

#include "grmkit/beta.hpp"
#include "grmkit/covariance.hpp"
#include "grmkit/eigs.hpp"
#include "grmkit/errors.hpp"
#include "grmkit/evaluation.hpp"
#include "grmkit/factor.hpp"
#include "grmkit/graph.hpp"
#include "grmkit/graph_export.hpp"
#include "grmkit/grm.hpp"
#include "grmkit/interaction.hpp"
#include "grmkit/panel.hpp"
#include "grmkit/parallel.hpp"
#include "grmkit/precision.hpp"
#include "grmkit/rng.hpp"
#include "grmkit/serialize.hpp"
#include "grmkit/synth.hpp"
