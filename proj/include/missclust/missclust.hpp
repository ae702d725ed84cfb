#pragma once

// Clustering with missing data: matrix completion + spectral clustering
// against likelihood-based estimation + latent profile analysis, plus the
// benchmark harness that compares them.

#include "missclust/bench.hpp"
#include "missclust/completion.hpp"
#include "missclust/csv.hpp"
#include "missclust/fiml.hpp"
#include "missclust/kmeans.hpp"
#include "missclust/labeling.hpp"
#include "missclust/lpa.hpp"
#include "missclust/matrix.hpp"
#include "missclust/metrics.hpp"
#include "missclust/norms.hpp"
#include "missclust/random_matrix.hpp"
#include "missclust/rng.hpp"
#include "missclust/simulators.hpp"
#include "missclust/spectral.hpp"
