#include "fingeo/lossmath.hpp"

#include <cmath>

#include "xsig.hpp"

namespace fingeo::loss {

namespace {

constexpr double kLogEps = 1e-7;

// Forward difference with backward fallback at the mask/grid edge.
double diff_x(const FloatGrid& g, const Mask& mask, int x, int y) {
    if (x + 1 < g.width && mask.at(x + 1, y))
        return g.at(x + 1, y) - g.at(x, y);
    if (x - 1 >= 0 && mask.at(x - 1, y))
        return g.at(x, y) - g.at(x - 1, y);
    return 0.0;
}

double diff_y(const FloatGrid& g, const Mask& mask, int x, int y) {
    if (y + 1 < g.height && mask.at(x, y + 1))
        return g.at(x, y + 1) - g.at(x, y);
    if (y - 1 >= 0 && mask.at(x, y - 1))
        return g.at(x, y) - g.at(x, y - 1);
    return 0.0;
}

double smoothness_term(const FloatGrid& g, const Mask& mask) {
    double acc = 0;
    size_t n = 0;
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x) {
            if (!mask.at(x, y))
                continue;
            const double dx = diff_x(g, mask, x, y);
            const double dy = diff_y(g, mask, x, y);
            acc += dx * dx + dy * dy;
            ++n;
        }
    return n ? acc / static_cast<double>(n) : 0.0;
}

} // namespace

void LossParams::validate() const {
    for (float v : {alpha, beta, gamma, sigma, lambda1, lambda2, lambda3})
        if (!(v > 0))
            throw PreconditionError("LossParams: all parameters must be positive");
}

float orientation_loss(const OrientationDistribution& pred,
                       const OrientationDistribution& truth, const Mask& mask,
                       float alpha) {
    require_same_dims(pred, mask, "orientation_loss");
    require_same_dims(truth, mask, "orientation_loss");
    if (pred.n_bins != truth.n_bins)
        throw DimensionError("orientation_loss: bin counts differ");
    const int w = pred.width, h = pred.height, nb = pred.n_bins;

    // Cross-entropy term, averaged over bins and masked pixels.
    double bce = 0;
    size_t npix = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y))
                continue;
            ++npix;
            double px_sum = 0;
            for (int i = 0; i < nb; ++i) {
                const double o = std::clamp(static_cast<double>(pred.at(i, x, y)),
                                            kLogEps, 1.0 - kLogEps);
                const double t = truth.at(i, x, y);
                px_sum += -(t * std::log(o) + (1.0 - t) * std::log(1.0 - o));
            }
            bce += px_sum / nb;
        }
    if (npix == 0)
        return 0.0f;
    bce /= static_cast<double>(npix);

    // Per-pixel doubled-angle resultants of the prediction.
    std::vector<double> dc(static_cast<size_t>(w) * h, 0.0),
        ds(static_cast<size_t>(w) * h, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y))
                continue;
            double c = 0, s = 0;
            for (int i = 0; i < nb; ++i) {
                const double a = detail::deg2rad(360.0 * i / nb);
                const double p = pred.at(i, x, y);
                c += p * std::cos(a);
                s += p * std::sin(a);
            }
            dc[static_cast<size_t>(y) * w + x] = c / nb;
            ds[static_cast<size_t>(y) * w + x] = s / nb;
        }

    // Coherence = |3x3 box sum of d| / 3x3 box sum of |d|, averaged over mask.
    double coh_sum = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y))
                continue;
            double sc = 0, ss = 0, smag = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = x + dx, ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h || !mask.at(nx, ny))
                        continue;
                    const size_t i = static_cast<size_t>(ny) * w + nx;
                    sc += dc[i];
                    ss += ds[i];
                    smag += std::hypot(dc[i], ds[i]);
                }
            coh_sum += smag > 1e-12 ? std::hypot(sc, ss) / smag : 0.0;
        }
    const double mean_coh = std::max(coh_sum / static_cast<double>(npix), kLogEps);
    const double coherence_term = alpha * (1.0 / mean_coh - 1.0);
    return static_cast<float>(bce + coherence_term);
}

float period_loss(const PeriodMap& pred, const PeriodMap& truth, const Mask& mask,
                  float beta) {
    require_same_dims(pred, mask, "period_loss");
    require_same_dims(truth, mask, "period_loss");
    double mse = 0;
    size_t n = 0;
    for (int y = 0; y < pred.height; ++y)
        for (int x = 0; x < pred.width; ++x) {
            if (!mask.at(x, y))
                continue;
            const double d = pred.at(x, y) - truth.at(x, y);
            mse += d * d;
            ++n;
        }
    if (n == 0)
        return 0.0f;
    mse /= static_cast<double>(n);
    return static_cast<float>(mse + beta * smoothness_term(pred, mask));
}

FloatGrid gradient_weight(const GradientMap& truth, float sigma) {
    if (!(sigma > 0))
        throw PreconditionError("gradient_weight: sigma must be positive");
    FloatGrid w(truth.width, truth.height);
    for (int y = 0; y < truth.height; ++y)
        for (int x = 0; x < truth.width; ++x)
            w.at(x, y) = std::exp(-truth.norm(x, y) / sigma);
    return w;
}

float gradient_loss(const GradientMap& pred, const GradientMap& truth,
                    const Mask& mask, float gamma, float sigma) {
    require_same_dims(pred, mask, "gradient_loss");
    require_same_dims(truth, mask, "gradient_loss");
    const FloatGrid w = gradient_weight(truth, sigma);
    double num = 0, den = 0;
    for (int y = 0; y < pred.height; ++y)
        for (int x = 0; x < pred.width; ++x) {
            if (!mask.at(x, y))
                continue;
            const size_t i = pred.idx(x, y);
            const double ex = pred.gx[i] - truth.gx[i];
            const double ey = pred.gy[i] - truth.gy[i];
            num += w.at(x, y) * (ex * ex + ey * ey);
            den += w.at(x, y);
        }
    if (den <= 0)
        return 0.0f;
    FloatGrid px(pred.width, pred.height), py(pred.width, pred.height);
    px.v.assign(pred.gx.begin(), pred.gx.end());
    py.v.assign(pred.gy.begin(), pred.gy.end());
    const double smooth = smoothness_term(px, mask) + smoothness_term(py, mask);
    return static_cast<float>(num / den + gamma * smooth);
}

float total_loss(float l_ori, float l_ped, float l_grad, const LossParams& params) {
    if (!std::isfinite(l_ori) || !std::isfinite(l_ped) || !std::isfinite(l_grad))
        throw PreconditionError("total_loss: inputs must be finite");
    return params.lambda1 * l_ori + params.lambda2 * l_ped + params.lambda3 * l_grad;
}

} // namespace fingeo::loss
