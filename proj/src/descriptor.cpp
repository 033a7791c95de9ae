#include <felp/descriptor.hpp>
#include <felp/error.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

namespace felp {

const char* to_string(Method m) noexcept { return m == Method::FELP ? "FELP" : "ELP"; }
const char* to_string(StainMode s) noexcept { return s == StainMode::GRAY ? "GRAY" : "HE"; }

Method parse_method(const std::string& s) {
    if (s == "FELP" || s == "felp" || s == "F-ELP") return Method::FELP;
    if (s == "ELP" || s == "elp") return Method::ELP;
    throw Error(ErrorKind::InvalidInput, "unknown method '" + s + "'");
}

StainMode parse_stain_mode(const std::string& s) {
    if (s == "GRAY" || s == "gray") return StainMode::GRAY;
    if (s == "HE" || s == "he") return StainMode::HE;
    throw Error(ErrorKind::InvalidInput, "unknown stain mode '" + s + "'");
}

void WindowSpec::validate() const {
    if (n < 3 || n % 2 == 0)
        throw Error(ErrorKind::InvalidInput, "window size must be odd and >= 3");
    if (stride < 1)
        throw Error(ErrorKind::InvalidInput, "stride must be >= 1");
    if (!(homogeneity_threshold > 0.0 && homogeneity_threshold <= 1.0))
        throw Error(ErrorKind::InvalidInput, "homogeneity threshold must lie in (0, 1]");
    if (!(T >= 0.0))
        throw Error(ErrorKind::InvalidInput, "ternary threshold T must be >= 0");
}

std::size_t descriptor_length(Method method, int n, StainMode mode) {
    const std::size_t per_angle = method == Method::FELP ? static_cast<std::size_t>(n - 1)
                                                         : std::size_t{1} << (n - 1);
    return 4 * per_angle * (mode == StainMode::HE ? 2 : 1);
}

double homogeneity(const WindowView& window, int n_bits) {
    const int n = window.n;
    if (n <= 0 || window.x0 < 0 || window.y0 < 0 || window.x0 + n > window.image->width()
        || window.y0 + n > window.image->height())
        throw Error(ErrorKind::InvalidInput, "window outside image");
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(n) * n);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            values.push_back(window.at(x, y));

    auto sorted = values;
    const std::size_t mid = sorted.size() / 2;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(mid), sorted.end());
    double median = sorted[mid];
    if (sorted.size() % 2 == 0) {
        const double lower = *std::max_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(mid));
        median = (median + lower) / 2.0;
    }

    double ss = 0.0;
    for (double v : values)
        ss += (v - median) * (v - median);
    return 1.0 - std::sqrt(ss) / std::ldexp(1.0, n_bits);
}

bool is_processable(const WindowView& window, const GradientField& field, const WindowSpec& spec) {
    if (homogeneity(window, window.image->n_bits()) >= spec.homogeneity_threshold)
        return false;
    return try_direction_mode(field, PixelRect{window.x0, window.y0, window.n, window.n}).has_value();
}

namespace {

// out(x, y) = in(R^q (x - c, y - c) + c), R the quarter turn (sx, sy) -> (-sy, sx).
void quarter_turn(std::span<const double> in, int n, int q, std::vector<double>& out) {
    out.resize(in.size());
    const int m = n - 1;
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            int sx = x;
            int sy = y;
            switch (q) {
                case 1: sx = m - y; sy = x; break;
                case 2: sx = m - x; sy = m - y; break;
                case 3: sx = y; sy = m - x; break;
                default: break;
            }
            out[static_cast<std::size_t>(y) * n + x] = in[static_cast<std::size_t>(sy) * n + sx];
        }
    }
}

double normalize_degrees(double theta) {
    double t = std::fmod(theta, 360.0);
    if (t < 0.0)
        t += 360.0;
    if (t >= 360.0)
        t = 0.0;
    return t;
}

// Reusable buffers for one window; avoids per-projection allocations in the scan.
struct ProjectionScratch {
    std::vector<double> turned;
};

void project(std::span<const double> window, int n, double theta, ProjectionScratch& scratch,
             std::vector<double>& out) {
    const double t = normalize_degrees(theta);
    const int q = std::min(3, static_cast<int>(t / 90.0));
    const double r = t - 90.0 * q;
    quarter_turn(window, n, q, scratch.turned);
    const auto& w = scratch.turned;

    out.assign(static_cast<std::size_t>(n), 0.0);
    if (r == 0.0) {
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x)
                out[static_cast<std::size_t>(x)] += w[static_cast<std::size_t>(y) * n + x];
        return;
    }

    const double rad = r * (std::numbers::pi / 180.0);
    const double cs = std::cos(rad);
    const double sn = std::sin(rad);
    const double c = (n - 1) / 2.0;
    auto tap = [&](int x, int y) -> double {
        if (x < 0 || y < 0 || x >= n || y >= n)
            return 0.0;
        return w[static_cast<std::size_t>(y) * n + x];
    };
    for (int u = 0; u < n; ++u) {
        const double su = u - c;
        double sum = 0.0;
        for (int v = 0; v < n; ++v) {
            const double sv = v - c;
            const double px = c + cs * su - sn * sv;
            const double py = c + sn * su + cs * sv;
            const double fx0 = std::floor(px);
            const double fy0 = std::floor(py);
            const double ax = px - fx0;
            const double ay = py - fy0;
            const int x0 = static_cast<int>(fx0);
            const int y0 = static_cast<int>(fy0);
            sum += (1.0 - ay) * ((1.0 - ax) * tap(x0, y0) + ax * tap(x0 + 1, y0))
                 + ay * ((1.0 - ax) * tap(x0, y0 + 1) + ax * tap(x0 + 1, y0 + 1));
        }
        out[static_cast<std::size_t>(u)] = sum;
    }
}

} // namespace

ProjectionVector radon_projection(std::span<const double> window, int n, double theta) {
    if (n < 1 || window.size() != static_cast<std::size_t>(n) * n)
        throw Error(ErrorKind::InvalidInput, "radon_projection expects an n x n window");
    ProjectionScratch scratch;
    ProjectionVector p;
    p.theta = normalize_degrees(theta);
    project(window, n, theta, scratch, p.values);
    return p;
}

std::vector<std::uint8_t> ternary_encode(std::span<const double> p, double T) {
    std::vector<std::uint8_t> q;
    if (p.size() < 2)
        return q;
    q.reserve(p.size() - 1);
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        const double d = p[i + 1] - p[i];
        if (d <= -T)
            q.push_back(0);
        else if (d >= T)
            q.push_back(2);
        else
            q.push_back(1);
    }
    return q;
}

int transition_count(std::span<const std::uint8_t> q) {
    int d = 0;
    for (std::size_t i = 1; i < q.size(); ++i)
        d += q[i] != q[i - 1] ? 1 : 0;
    return d;
}

std::uint32_t minmax_code(std::span<const double> p) {
    if (p.size() > 33)
        throw Error(ErrorKind::InvalidInput, "minmax_code supports projections of length <= 33");
    std::uint32_t code = 0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i)
        if (p[i + 1] - p[i] > 0.0)
            code |= std::uint32_t{1} << i;
    return code;
}

std::vector<std::uint64_t> descriptor_counts(const RasterImage& gray, const WindowSpec& spec, Method method) {
    spec.validate();
    if (gray.channels() != 1)
        throw Error(ErrorKind::InvalidInput, "descriptor input must be single-channel");
    const int n = spec.n;
    if (method == Method::ELP && n != 9)
        throw Error(ErrorKind::InvalidInput, "ELP baseline is defined for n = 9 only");
    if (gray.width() < n || gray.height() < n)
        throw Error(ErrorKind::InvalidInput, "image smaller than the window");

    const std::size_t block = method == Method::FELP ? static_cast<std::size_t>(n - 1)
                                                     : std::size_t{1} << (n - 1);
    std::vector<std::uint64_t> counts(4 * block, 0);

    const GradientField field = gradient(gray, spec.gradient_op);
    const double scale = 1.0 / gray.max_value();
    std::vector<double> window(static_cast<std::size_t>(n) * n);
    std::vector<double> proj;
    ProjectionScratch scratch;
    constexpr std::array<double, 4> offsets{0.0, 45.0, 90.0, 135.0};

    for (int y0 = 0; y0 + n <= gray.height(); y0 += spec.stride) {
        for (int x0 = 0; x0 + n <= gray.width(); x0 += spec.stride) {
            const WindowView view{&gray, x0, y0, n};
            if (homogeneity(view, gray.n_bits()) >= spec.homogeneity_threshold)
                continue;
            const auto mode = try_direction_mode(field, PixelRect{x0, y0, n, n});
            if (!mode)
                continue;

            for (int y = 0; y < n; ++y)
                for (int x = 0; x < n; ++x)
                    window[static_cast<std::size_t>(y) * n + x] = view.at(x, y) * scale;

            for (std::size_t a = 0; a < offsets.size(); ++a) {
                project(window, n, mode->degrees + offsets[a], scratch, proj);
                std::size_t bin = 0;
                if (method == Method::FELP)
                    bin = static_cast<std::size_t>(transition_count(ternary_encode(proj, spec.T)));
                else
                    bin = minmax_code(proj);
                ++counts[a * block + bin];
            }
        }
    }
    return counts;
}

std::vector<double> l1_normalize(std::span<const std::uint64_t> counts) {
    const std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
    if (total == 0)
        throw Error(ErrorKind::EmptyDescriptor, "no processable windows");
    std::vector<double> bins(counts.size());
    const double inv = static_cast<double>(total);
    std::transform(counts.begin(), counts.end(), bins.begin(),
                   [inv](std::uint64_t c) { return static_cast<double>(c) / inv; });
    return bins;
}

Descriptor compute_descriptor(const RasterImage& gray, const WindowSpec& spec, Method method) {
    Descriptor d;
    d.bins = l1_normalize(descriptor_counts(gray, spec, method));
    d.method = method;
    d.n = spec.n;
    d.stain_mode = StainMode::GRAY;
    d.T = spec.T;
    d.homogeneity_threshold = spec.homogeneity_threshold;
    return d;
}

Descriptor felp_descriptor(const RasterImage& gray, const WindowSpec& spec) {
    return compute_descriptor(gray, spec, Method::FELP);
}

Descriptor elp_descriptor(const RasterImage& gray, const WindowSpec& spec) {
    return compute_descriptor(gray, spec, Method::ELP);
}

Descriptor stained_descriptor(const RasterImage& h_map, const RasterImage& e_map, const WindowSpec& spec,
                              Method method) {
    if (h_map.width() != e_map.width() || h_map.height() != e_map.height())
        throw Error(ErrorKind::InvalidInput, "hematoxylin and eosin maps differ in size");
    if (h_map.channels() != 1 || e_map.channels() != 1)
        throw Error(ErrorKind::InvalidInput, "concentration maps must be single-channel");
    const Descriptor h = compute_descriptor(h_map, spec, method);
    const Descriptor e = compute_descriptor(e_map, spec, method);

    Descriptor out = h;
    out.stain_mode = StainMode::HE;
    out.grayscale = "none";
    out.bins.insert(out.bins.end(), e.bins.begin(), e.bins.end());
    for (double& b : out.bins)
        b /= 2.0;
    return out;
}

} // namespace felp
