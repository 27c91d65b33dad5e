#include "rdslab/noise_path.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "rdslab/errors.hpp"
#include "rdslab/rng.hpp"

namespace rdslab {

namespace {
constexpr char kMagic[8] = {'R', 'D', 'S', 'N', 'P', 'T', '1', '\0'};

static_assert(std::endian::native == std::endian::little,
              "NoisePath binary format is little-endian");

template <typename T>
void write_pod(std::ofstream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& is) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}
} // namespace

NoisePath NoisePath::sample(double dt, double t_minus, double t_plus,
                            const Eigen::VectorXd& q, std::uint64_t seed) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw config_error("sample_path: dt must be positive and finite");
    if (!(t_minus < 0.0 && 0.0 < t_plus) || !std::isfinite(t_minus) || !std::isfinite(t_plus))
        throw config_error("sample_path: need t_minus < 0 < t_plus, finite");
    if (q.size() < 1) throw config_error("sample_path: need at least one channel");
    for (int ch = 0; ch < q.size(); ++ch) {
        if (!(q[ch] >= 0.0) || !std::isfinite(q[ch]))
            throw config_error("sample_path: q entries must be finite and >= 0");
    }

    NoisePath p;
    p.dt_ = dt;
    const long n = static_cast<long>(std::llround((t_plus - t_minus) / dt));
    p.t_minus_ = t_minus;
    p.t_plus_ = t_minus + n * dt;
    p.seed_ = seed;
    p.q_ = q;
    p.increments_.resize(q.size(), n);
    for (int ch = 0; ch < q.size(); ++ch) {
        GaussianRng rng(seed, static_cast<std::uint64_t>(ch));
        const double sd = std::sqrt(q[ch] * dt);
        for (long i = 0; i < n; ++i) p.increments_(ch, i) = sd * rng.gaussian();
    }
    return p;
}

long PathView::grid_index(double t) const {
    const double x = (t - t_minus()) / dt();
    const long i = static_cast<long>(std::llround(x));
    if (std::abs(x - i) > 1e-9 * std::max(1.0, std::abs(x)))
        throw config_error("PathView: time is not a grid multiple");
    if (i < 0 || i > base_->n_steps())
        throw config_error("PathView: time outside the available horizon");
    return i;
}

bool PathView::on_grid(double t) const {
    const double x = (t - t_minus()) / dt();
    const long i = static_cast<long>(std::llround(x));
    return std::abs(x - i) <= 1e-9 * std::max(1.0, std::abs(x)) && i >= 0 && i <= base_->n_steps();
}

Eigen::VectorXd PathView::wiener(double t) const {
    // W_t - W_0 in view time; prefix sums over the increments between.
    const long i0 = grid_index(0.0);
    const long i1 = grid_index(t);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n_channels());
    const long lo = std::min(i0, i1);
    const long hi = std::max(i0, i1);
    for (long i = lo; i < hi; ++i)
        for (int ch = 0; ch < n_channels(); ++ch) w[ch] += increment(ch, i);
    if (i1 < i0) w = -w;
    return w;
}

PathView shift(const PathView& view, double s) {
    const double x = s / view.dt();
    const long k = static_cast<long>(std::llround(x));
    if (std::abs(x - k) > 1e-9 * std::max(1.0, std::abs(x)))
        throw config_error("shift: s must be a grid multiple of dt");
    PathView out = view;
    out.offset_steps_ += k;
    if (out.offset_steps_ < 0 || out.offset_steps_ > view.base().n_steps())
        throw config_error("shift: shifted window leaves the sampled horizon");
    return out;
}

void NoisePath::save(const std::string& filename) const {
    std::ofstream os(filename, std::ios::binary);
    if (!os) throw io_error("NoisePath::save: cannot open " + filename);
    os.write(kMagic, sizeof(kMagic));
    write_pod(os, static_cast<std::uint32_t>(n_channels()));
    write_pod(os, seed_);
    write_pod(os, dt_);
    write_pod(os, t_minus_);
    write_pod(os, t_plus_);
    for (int ch = 0; ch < n_channels(); ++ch) write_pod(os, q_[ch]);
    const std::uint64_t n = static_cast<std::uint64_t>(n_steps());
    write_pod(os, n);
    for (int ch = 0; ch < n_channels(); ++ch)
        os.write(reinterpret_cast<const char*>(increments_.row(ch).eval().data()),
                 static_cast<std::streamsize>(n * sizeof(double)));
    if (!os) throw io_error("NoisePath::save: write failed for " + filename);
}

NoisePath NoisePath::load(const std::string& filename) {
    std::ifstream is(filename, std::ios::binary);
    if (!is) throw io_error("NoisePath::load: cannot open " + filename);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw io_error("NoisePath::load: bad magic in " + filename);
    NoisePath p;
    const auto channels = read_pod<std::uint32_t>(is);
    p.seed_ = read_pod<std::uint64_t>(is);
    p.dt_ = read_pod<double>(is);
    p.t_minus_ = read_pod<double>(is);
    p.t_plus_ = read_pod<double>(is);
    p.q_.resize(channels);
    for (std::uint32_t ch = 0; ch < channels; ++ch) p.q_[ch] = read_pod<double>(is);
    const auto n = read_pod<std::uint64_t>(is);
    p.increments_.resize(channels, static_cast<long>(n));
    for (std::uint32_t ch = 0; ch < channels; ++ch) {
        Eigen::VectorXd row(static_cast<long>(n));
        is.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(n * sizeof(double)));
        p.increments_.row(ch) = row;
    }
    if (!is) throw io_error("NoisePath::load: truncated file " + filename);
    return p;
}

} // namespace rdslab
