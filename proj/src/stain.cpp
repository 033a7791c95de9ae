#include <felp/stain.hpp>
#include <felp/error.hpp>
#include <felp/format.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace felp {

namespace {

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 normalized(Vec3 v) {
    const double len = norm(v);
    for (double& c : v)
        c /= len;
    return v;
}

// Nearest-rank percentile of a sorted sample; unchanged when every element is duplicated.
double nearest_rank(std::span<const double> sorted, double pct) {
    const auto n = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(pct / 100.0 * n));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

// Orients a wedge extreme into the positive octant.
Vec3 to_stain_vector(const Vec3& v) {
    Vec3 out = v;
    if (out[0] + out[1] + out[2] < 0.0)
        for (double& c : out)
            c = -c;
    for (double& c : out)
        c = std::max(c, 0.0);
    const double len = norm(out);
    if (!(len > 0.0))
        throw Error(ErrorKind::BasisEstimationFailed, "wedge extreme has no positive OD component");
    for (double& c : out)
        c /= len;
    return out;
}

} // namespace

std::vector<Vec3> optical_density(const RasterImage& img) {
    if (img.channels() != 3)
        throw Error(ErrorKind::InvalidInput, "optical_density expects a 3-channel image");
    const double i0 = img.max_value();
    // Lookup per intensity level keeps the transform bit-identical across pixels.
    std::vector<double> table(static_cast<std::size_t>(img.max_value()) + 1);
    for (std::size_t v = 0; v < table.size(); ++v)
        table[v] = -std::log10(std::max(static_cast<double>(v), 1.0) / i0);

    const auto data = img.data();
    std::vector<Vec3> od(static_cast<std::size_t>(img.width()) * img.height());
    for (std::size_t i = 0; i < od.size(); ++i)
        od[i] = {table[data[3 * i]], table[data[3 * i + 1]], table[data[3 * i + 2]]};
    return od;
}

StainBasis default_basis() {
    StainBasis b;
    b.h = normalized({0.65, 0.70, 0.29});
    b.e = normalized({0.07, 0.99, 0.11});
    b.fallback = true;
    return b;
}

StainBasis estimate_basis(std::span<const Vec3> od_pixels, const WedgeParams& params) {
    std::vector<Vec3> tissue;
    tissue.reserve(od_pixels.size());
    for (const auto& p : od_pixels)
        if (p[0] >= params.beta || p[1] >= params.beta || p[2] >= params.beta)
            tissue.push_back(p);
    if (tissue.size() < params.min_pixels)
        throw Error(ErrorKind::BasisEstimationFailed,
                    "only " + std::to_string(tissue.size()) + " tissue pixels above the OD threshold");
    // Fixed summation order makes the estimate independent of input order.
    std::sort(tissue.begin(), tissue.end());

    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& p : tissue)
        mean += Eigen::Vector3d(p[0], p[1], p[2]);
    mean /= static_cast<double>(tissue.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& p : tissue) {
        const Eigen::Vector3d d = Eigen::Vector3d(p[0], p[1], p[2]) - mean;
        cov += d * d.transpose();
    }
    cov /= static_cast<double>(tissue.size());

    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    if (eig.info() != Eigen::Success)
        throw Error(ErrorKind::BasisEstimationFailed, "eigen decomposition failed");
    const auto& values = eig.eigenvalues();
    if (!(values[2] > 0.0) || values[1] <= 1e-12 * values[2])
        throw Error(ErrorKind::BasisEstimationFailed, "optical density cloud is rank one");
    Eigen::Vector3d axis1 = eig.eigenvectors().col(2);
    Eigen::Vector3d axis2 = eig.eigenvectors().col(1);
    if (axis1.sum() < 0.0)
        axis1 = -axis1;
    if (axis2.sum() < 0.0)
        axis2 = -axis2;

    std::vector<double> angles;
    angles.reserve(tissue.size());
    for (const auto& p : tissue) {
        const Eigen::Vector3d v(p[0], p[1], p[2]);
        angles.push_back(std::atan2(v.dot(axis2), v.dot(axis1)));
    }
    std::sort(angles.begin(), angles.end());
    const double lo = nearest_rank(angles, params.alpha);
    const double hi = nearest_rank(angles, 100.0 - params.alpha);

    auto extreme = [&](double phi) {
        const Eigen::Vector3d v = std::cos(phi) * axis1 + std::sin(phi) * axis2;
        return to_stain_vector({v[0], v[1], v[2]});
    };
    const Vec3 a = extreme(lo);
    const Vec3 b = extreme(hi);
    if (angle_between(a, b) < params.min_wedge_degrees)
        throw Error(ErrorKind::BasisEstimationFailed, "stain wedge is degenerate (single stain)");

    StainBasis basis;
    if (a[2] >= b[2]) {
        basis.h = a;
        basis.e = b;
    } else {
        basis.h = b;
        basis.e = a;
    }
    return basis;
}

ConcentrationMaps unmix(const RasterImage& img, const StainBasis& basis) {
    const double hh = dot(basis.h, basis.h);
    const double ee = dot(basis.e, basis.e);
    const double he = dot(basis.h, basis.e);
    const double half_trace = (hh + ee) / 2.0;
    const double det = hh * ee - he * he;
    const double disc = std::sqrt(std::max(half_trace * half_trace - det, 0.0));
    const double lmax = half_trace + disc;
    const double lmin = half_trace - disc;
    if (!(lmin > 0.0) || lmax / lmin > 1e6)
        throw Error(ErrorKind::InvalidBasis, "stain basis is numerically collinear");

    const auto od = optical_density(img);
    ConcentrationMaps maps;
    maps.width = img.width();
    maps.height = img.height();
    maps.h.resize(od.size());
    maps.e.resize(od.size());
    for (std::size_t i = 0; i < od.size(); ++i) {
        const double bh = dot(basis.h, od[i]);
        const double be = dot(basis.e, od[i]);
        const double ch = (ee * bh - he * be) / det;
        const double ce = (hh * be - he * bh) / det;
        maps.h[i] = std::max(ch, 0.0);
        maps.e[i] = std::max(ce, 0.0);
    }
    return maps;
}

namespace {

RasterImage quantize_one(std::span<const double> values, int width, int height, double percentile,
                         double& scale) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    scale = sorted.empty() ? 0.0 : nearest_rank(sorted, percentile);
    if (!(scale > 0.0) && !sorted.empty())
        scale = sorted.back();
    RasterImage out(width, height, 1, 8);
    if (!(scale > 0.0))
        return out;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double c = values[static_cast<std::size_t>(y) * width + x];
            out.set(x, y, static_cast<std::uint16_t>(std::lround(255.0 * std::min(c / scale, 1.0))));
        }
    }
    return out;
}

} // namespace

QuantizedMaps quantize(const ConcentrationMaps& maps, double percentile) {
    QuantizedMaps q;
    q.h = quantize_one(maps.h, maps.width, maps.height, percentile, q.h_scale);
    q.e = quantize_one(maps.e, maps.width, maps.height, percentile, q.e_scale);
    return q;
}

double max_channel_variance(const RasterImage& img) {
    const auto data = img.data();
    const int ch = img.channels();
    const std::size_t pixels = static_cast<std::size_t>(img.width()) * img.height();
    if (pixels == 0)
        return 0.0;
    double worst = 0.0;
    for (int c = 0; c < ch; ++c) {
        double sum = 0.0;
        double sq = 0.0;
        for (std::size_t i = 0; i < pixels; ++i) {
            const double v = data[i * ch + c];
            sum += v;
            sq += v * v;
        }
        const double mean = sum / pixels;
        worst = std::max(worst, std::max(sq / pixels - mean * mean, 0.0));
    }
    return worst;
}

bool artefact_flag(const RasterImage& img, double tau) {
    return max_channel_variance(img) < tau;
}

StainBasis pooled_basis_for_patient(std::span<const RasterImage> patches, const WedgeParams& params) {
    if (patches.empty())
        throw Error(ErrorKind::BasisEstimationFailed, "patient has no usable patches");
    std::vector<Vec3> pooled;
    for (const auto& patch : patches) {
        const auto od = optical_density(patch);
        pooled.insert(pooled.end(), od.begin(), od.end());
    }
    return estimate_basis(pooled, params);
}

double angle_between(const Vec3& a, const Vec3& b) {
    const double c = dot(a, b) / (norm(a) * norm(b));
    return std::acos(std::clamp(c, -1.0, 1.0)) * (180.0 / std::numbers::pi);
}

void write_basis(std::ostream& out, const StainBasis& basis, std::span<const std::string> provenance) {
    for (const auto& line : provenance)
        out << "# " << line << '\n';
    out << "h " << format_double(basis.h[0]) << ' ' << format_double(basis.h[1]) << ' '
        << format_double(basis.h[2]) << '\n';
    out << "e " << format_double(basis.e[0]) << ' ' << format_double(basis.e[1]) << ' '
        << format_double(basis.e[2]) << '\n';
    out << "fallback " << (basis.fallback ? 1 : 0) << '\n';
}

StainBasis read_basis(std::istream& in) {
    StainBasis basis;
    bool seen_h = false;
    bool seen_e = false;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#')
            continue;
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key == "h" || key == "e") {
            Vec3& v = key == "h" ? basis.h : basis.e;
            if (!(ss >> v[0] >> v[1] >> v[2]))
                throw Error(ErrorKind::InvalidInput, "basis record: malformed '" + key + "' line");
            (key == "h" ? seen_h : seen_e) = true;
        } else if (key == "fallback") {
            int flag = 0;
            ss >> flag;
            basis.fallback = flag != 0;
        } else {
            throw Error(ErrorKind::InvalidInput, "basis record: unknown key '" + key + "'");
        }
    }
    if (!seen_h || !seen_e)
        throw Error(ErrorKind::InvalidInput, "basis record: missing stain vector");
    return basis;
}

} // namespace felp
