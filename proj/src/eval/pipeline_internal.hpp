#pragma once

#include "kmaha/eval.hpp"

namespace kmaha::eval::detail {

/// Pipeline on already preprocessed data, with the kernel fixed (linear when
/// unset). No standardizer is attached.
FittedPipeline fit_preprocessed(const MethodConfig& config, const data::Dataset& ds,
                                const std::optional<kernel::KernelSpec>& kernel, KpcaCache* cache);

}  // namespace kmaha::eval::detail
