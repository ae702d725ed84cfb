// Compares the three incomplete-data pipelines on one masked dataset:
// likelihood-based mixture fitting against completion followed by either
// clustering method.

#include <iostream>

#include <missclust/missclust.hpp>

int main() {
  using namespace missclust;

  Rng rng(123);
  BlockMeanSpec spec;
  spec.n = 300;  // smaller than the benchmark default so the demo runs in seconds
  spec.d = 50;
  Rng data_rng = rng.split(0);
  const Dataset ds = gen_block_mean(spec, data_rng);
  const MaskedMatrix masked = remove_entries(ds.points, 0.3, data_rng);

  EmConfig em;
  Rng fiml_rng = rng.split(1);
  const FimlLpaResult direct = fiml_lpa_fit(masked, 2, em, fiml_rng);

  CompletionConfig ccfg;
  ccfg.max_iter = 200;
  const CompletionResult comp = complete(masked, ccfg);
  Rng lpa_rng = rng.split(2);
  const LpaFitResult after_completion = lpa_fit(comp.completed, 2, em, lpa_rng);
  Rng sc_rng = rng.split(3);
  const Labeling sc = spectral_cluster(comp.completed, SpectralConfig{}, SimilarityConfig{}, sc_rng);

  std::cout << "30% of entries removed from a " << spec.n << "x" << spec.d << " matrix\n"
            << "likelihood mixture on observed entries, CCR: " << ccr(direct.labeling, ds.truth)
            << '\n'
            << "completion then mixture, CCR:                "
            << ccr(lpa_assign(after_completion.model, comp.completed), ds.truth) << '\n'
            << "completion then spectral, CCR:               " << ccr(sc, ds.truth) << '\n';
  return 0;
}
