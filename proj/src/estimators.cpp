#include "chromalint/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace chromalint {

namespace {

bool is_inf(double p) { return std::isinf(p); }

std::map<std::string, std::string> parse_kv(std::string_view text) {
    std::map<std::string, std::string> kv;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        std::string_view item = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos
                                                                                 : comma - pos);
        std::size_t eq = item.find('=');
        if (eq == std::string_view::npos || eq == 0 || eq + 1 >= item.size())
            throw DataError("bad estimator parameter \"" + std::string(item) +
                            "\" (expected key=value)");
        kv[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return kv;
}

double parse_p(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw DataError("bad Minkowski exponent \"" + s + "\"");
    }
}

}  // namespace

EstimatorSpec EstimatorSpec::parse(std::string_view text) {
    std::size_t colon = text.find(':');
    std::string name(text.substr(0, colon));
    auto kv = colon == std::string_view::npos ? std::map<std::string, std::string>{}
                                              : parse_kv(text.substr(colon + 1));
    auto reject_keys = [&](std::initializer_list<const char*> allowed) {
        for (const auto& [k, v] : kv) {
            bool ok = false;
            for (const char* a : allowed)
                if (k == a) ok = true;
            if (!ok) throw DataError("estimator \"" + name + "\" does not take parameter \"" + k + "\"");
        }
    };

    EstimatorSpec spec;
    if (name == "gray-world") {
        reject_keys({});
        spec = gray_world();
    } else if (name == "white-patch") {
        reject_keys({});
        spec = white_patch();
    } else if (name == "shades-of-gray") {
        reject_keys({"p"});
        spec = shades_of_gray(kv.count("p") ? parse_p(kv["p"]) : 6.0);
    } else if (name == "gray-edge") {
        reject_keys({"n", "p", "sigma"});
        spec = gray_edge(kv.count("n") ? std::stoi(kv["n"]) : 1,
                         kv.count("p") ? parse_p(kv["p"]) : 6.0,
                         kv.count("sigma") ? std::stod(kv["sigma"]) : 6.0);
    } else {
        throw DataError("unknown estimator \"" + name + "\"");
    }
    spec.validate();
    return spec;
}

std::string EstimatorSpec::to_string() const {
    std::ostringstream os;
    auto p_str = [&] { return is_inf(p) ? std::string("inf") : format_double(p); };
    switch (kind) {
        case EstimatorKind::gray_world: return "gray-world";
        case EstimatorKind::white_patch: return "white-patch";
        case EstimatorKind::shades_of_gray:
            os << "shades-of-gray:p=" << p_str();
            return os.str();
        case EstimatorKind::gray_edge:
            os << "gray-edge:n=" << derivative_order << ",p=" << p_str()
               << ",sigma=" << format_double(sigma);
            return os.str();
    }
    return {};
}

void EstimatorSpec::validate() const {
    if (!(p >= 1.0)) throw DataError("Minkowski exponent must be >= 1");
    if (derivative_order < 0 || derivative_order > 2)
        throw DataError("derivative order must be 0, 1 or 2");
    if (!(sigma >= 0.0)) throw DataError("sigma must be nonnegative");
    if (derivative_order >= 1 && !(sigma > 0.0))
        throw DataError("derivative estimators need sigma > 0");
    switch (kind) {
        case EstimatorKind::gray_world:
            if (p != 1.0 || derivative_order != 0 || sigma != 0.0)
                throw DataError("gray-world is fixed at p=1, order 0, sigma 0");
            break;
        case EstimatorKind::white_patch:
            if (!is_inf(p) || derivative_order != 0)
                throw DataError("white-patch is fixed at p=inf, order 0");
            break;
        case EstimatorKind::shades_of_gray:
            if (derivative_order != 0) throw DataError("shades-of-gray uses order 0");
            if (is_inf(p))
                throw DataError("shades-of-gray with p=inf is white-patch; use that estimator");
            break;
        case EstimatorKind::gray_edge:
            if (derivative_order < 1) throw DataError("gray-edge needs derivative order >= 1");
            break;
    }
}

namespace {

// Sampled Gaussian kernels, truncated at ceil(3*sigma). The order-0 kernel
// sums to 1; derivative kernels are scaled to be exact on x and x^2/2, so a
// linear ramp differentiates to exactly 1.0 away from the borders.
std::vector<double> gaussian_kernel(int order, double sigma, int radius) {
    std::vector<double> phi(2 * radius + 1);
    double s = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        phi[i + radius] = std::exp(-0.5 * (i / sigma) * (i / sigma));
        s += phi[i + radius];
    }
    for (double& x : phi) x /= s;
    if (order == 0) return phi;

    double m2 = 0.0, m4 = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        m2 += static_cast<double>(i) * i * phi[i + radius];
        m4 += static_cast<double>(i) * i * i * i * phi[i + radius];
    }
    std::vector<double> k(2 * radius + 1);
    if (order == 1) {
        for (int i = -radius; i <= radius; ++i) k[i + radius] = -i * phi[i + radius] / m2;
    } else {
        double scale = 2.0 / (m4 - m2 * m2);
        for (int i = -radius; i <= radius; ++i)
            k[i + radius] = (static_cast<double>(i) * i - m2) * phi[i + radius] * scale;
    }
    return k;
}

int reflect_index(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

Plane convolve_x(const Plane& in, const std::vector<double>& k, int radius) {
    Plane out{in.width, in.height, std::vector<double>(in.v.size())};
    for (int y = 0; y < in.height; ++y)
        for (int x = 0; x < in.width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += in.at(reflect_index(x - i, in.width), y) * k[i + radius];
            out.at(x, y) = acc;
        }
    return out;
}

Plane convolve_y(const Plane& in, const std::vector<double>& k, int radius) {
    Plane out{in.width, in.height, std::vector<double>(in.v.size())};
    for (int y = 0; y < in.height; ++y)
        for (int x = 0; x < in.width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += in.at(x, reflect_index(y - i, in.height)) * k[i + radius];
            out.at(x, y) = acc;
        }
    return out;
}

}  // namespace

Plane gaussian_derivative(const Plane& channel, int order, double sigma) {
    if (order < 0 || order > 2) throw DataError("derivative order must be 0, 1 or 2");
    if (order >= 1 && !(sigma > 0.0)) throw DataError("derivative of order >= 1 needs sigma > 0");
    if (order == 0 && sigma == 0.0) return channel;

    int radius = static_cast<int>(std::ceil(3.0 * sigma));
    auto smooth = gaussian_kernel(0, sigma, radius);
    if (order == 0) return convolve_y(convolve_x(channel, smooth, radius), smooth, radius);

    auto deriv = gaussian_kernel(order, sigma, radius);
    Plane dx = convolve_y(convolve_x(channel, deriv, radius), smooth, radius);
    Plane dy = convolve_x(convolve_y(channel, deriv, radius), smooth, radius);
    Plane out{channel.width, channel.height, std::vector<double>(channel.v.size())};
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = std::hypot(dx.v[i], dy.v[i]);
    return out;
}

Illuminant estimate(const LinearImage& img, const EstimatorSpec& spec, const SaturationMask* mask,
                    bool allow_unsubtracted) {
    spec.validate();
    if (!img.black_subtracted && !allow_unsubtracted)
        throw PipelineError(
            "estimation requires a black-subtracted image; subtract the black level first "
            "(the unsafe override exists only to demonstrate the wrong pipeline)");
    if (mask && (mask->width != img.width || mask->height != img.height))
        throw DataError("saturation mask dimensions do not match the image");

    const std::size_t npix = img.pixel_count();
    std::size_t unmasked = 0;
    for (std::size_t p = 0; p < npix; ++p)
        if (!mask || mask->flags[p] == 0) ++unmasked;
    if (unmasked == 0) throw DataError("all pixels are masked; nothing to estimate from");

    Rgb pooled;
    for (int c = 0; c < 3; ++c) {
        Plane chan{img.width, img.height, std::vector<double>(npix)};
        for (std::size_t p = 0; p < npix; ++p) chan.v[p] = img.data[p * 3 + c];
        if (spec.derivative_order >= 1 || spec.sigma > 0.0)
            chan = gaussian_derivative(chan, spec.derivative_order, spec.sigma);

        double peak = 0.0;
        for (std::size_t p = 0; p < npix; ++p)
            if (!mask || mask->flags[p] == 0) peak = std::max(peak, std::abs(chan.v[p]));

        if (std::isinf(spec.p) || peak == 0.0) {
            pooled[c] = peak;
            continue;
        }
        // Normalize by the channel peak before raising to p so large exponents
        // cannot overflow; undo afterwards.
        KahanSum acc;
        for (std::size_t p = 0; p < npix; ++p)
            if (!mask || mask->flags[p] == 0)
                acc.add(std::pow(std::abs(chan.v[p]) / peak, spec.p));
        pooled[c] = peak * std::pow(acc.value() / static_cast<double>(unmasked), 1.0 / spec.p);
    }

    if (!(norm(pooled) > 0.0))
        throw DataError("estimate degenerated to the zero vector (image is identically zero?)");
    return Illuminant(pooled);
}

}  // namespace chromalint
