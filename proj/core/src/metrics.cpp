#include "fingeo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fingeo::metrics {

float orientation_error(const OrientationField& pred, const OrientationField& truth,
                        const Mask& mask) {
    require_same_dims(pred, truth, "orientation_error");
    require_same_dims(pred, mask, "orientation_error");
    double sum = 0.0;
    size_t n = 0;
    for (int y = 0; y < pred.height; ++y)
        for (int x = 0; x < pred.width; ++x) {
            if (!mask.at(x, y))
                continue;
            double d = std::abs(pred.at(x, y) - truth.at(x, y));
            d = std::fmod(d, 180.0);
            sum += std::min(d, 180.0 - d);
            ++n;
        }
    if (n == 0)
        throw NoForegroundError("orientation_error: empty mask");
    return static_cast<float>(sum / n);
}

namespace {

double mask_min(const FloatGrid& g, const Mask& m) {
    double lo = std::numeric_limits<double>::infinity();
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x)
            if (m.at(x, y))
                lo = std::min(lo, static_cast<double>(g.at(x, y)));
    return std::isfinite(lo) ? lo : 0.0;
}

double weight_at(const RmseOptions& opts, int x, int y) {
    if (!opts.weighted)
        return 1.0;
    if (!opts.truth_gradient)
        throw PreconditionError("rmse: weighted requested without a reference gradient");
    return std::exp(-opts.truth_gradient->norm(x, y) / opts.sigma);
}

float finish(double wsum, double werr) {
    return wsum > 0 ? static_cast<float>(std::sqrt(werr / wsum)) : 0.0f;
}

} // namespace

float rmse(const FloatGrid& pred, const FloatGrid& truth, const Mask& mask,
           RmseKind kind, const RmseOptions& opts) {
    require_same_dims(pred, truth, "rmse");
    require_same_dims(pred, mask, "rmse");
    if (opts.weighted && opts.truth_gradient)
        require_same_dims(*opts.truth_gradient, mask, "rmse");
    const double off = kind == RmseKind::Depth
                           ? mask_min(pred, mask) - mask_min(truth, mask)
                           : 0.0;
    double wsum = 0.0, werr = 0.0;
    for (int y = 0; y < pred.height; ++y)
        for (int x = 0; x < pred.width; ++x) {
            if (!mask.at(x, y))
                continue;
            const double w = weight_at(opts, x, y);
            const double d = (pred.at(x, y) - off) - truth.at(x, y);
            wsum += w;
            werr += w * d * d;
        }
    return finish(wsum, werr);
}

float rmse(const GradientMap& pred, const GradientMap& truth, const Mask& mask,
           const RmseOptions& opts) {
    require_same_dims(pred, truth, "rmse");
    require_same_dims(pred, mask, "rmse");
    if (opts.weighted && opts.truth_gradient)
        require_same_dims(*opts.truth_gradient, mask, "rmse");
    double wsum = 0.0, werr = 0.0;
    for (int y = 0; y < pred.height; ++y)
        for (int x = 0; x < pred.width; ++x) {
            if (!mask.at(x, y))
                continue;
            const size_t i = pred.idx(x, y);
            const double w = weight_at(opts, x, y);
            const double dx = pred.gx[i] - truth.gx[i];
            const double dy = pred.gy[i] - truth.gy[i];
            wsum += w;
            werr += w * (dx * dx + dy * dy);
        }
    return finish(wsum, werr);
}

} // namespace fingeo::metrics
