#pragma once

#include "cascade/dataset.hpp"

namespace cascade {

// 1000 points over three binary features whose support is exactly five
// configurations; the generating density is a six-leaf cascade.  Rows come
// out sorted by configuration so emitted files are stable.
Dataset gen_sparse_tree_dataset();

// 100 points over one 100-category ordinal feature, one point per
// category.  Uniform data on which per-configuration histograms cannot
// generalize across a half-split.
Dataset gen_extreme_uniform();

}  // namespace cascade
