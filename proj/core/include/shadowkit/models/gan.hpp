#pragma once

#include <span>

#include "shadowkit/datakit/sample.hpp"
#include "shadowkit/models/specs.hpp"

namespace shadowkit::models {

/// out = x + g * M * (1 - x), M shared across the three channels.
/// image [N, 3, H, W], mask [N, 1, H, W], gain in [0, 1].
Var apply_attenuation(Var image, Var mask, double gain);

/// Rec. 601 luma of an RGB triple.
inline double luminance(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

/// Mean luminance lift inside the shadow mask minus the mean lift outside,
/// for one image and its attenuation mask M (H*W). Returns 0 when the mask
/// is empty or covers everything.
double attenuation_score(const datakit::Image& image, std::span<const double> m, double gain,
                         const datakit::Mask& shadow);

/// Generator masks (H*W each) for a set of samples.
std::vector<std::vector<double>> predict_attenuation(GanModel& model,
                                                     std::span<const datakit::Sample* const> samples,
                                                     std::size_t batch = 8);

/// Mean attenuation_score over the samples that carry a mask with both
/// shadow and non-shadow pixels.
double attenuation_score(GanModel& model, std::span<const datakit::Sample* const> samples);

}  // namespace shadowkit::models
