#include "c3d/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>

static_assert(std::endian::native == std::endian::little,
              "snapshot I/O assumes a little-endian host");

namespace c3d {

// ============================================================================
// GridSpec
// ============================================================================

GridSpec::GridSpec(int nx_, int ny_, int nz_, double lx_, double ly_, double lz_,
                   double dealias_)
    : nx(nx_), ny(ny_), nz(nz_), lx(lx_), ly(ly_), lz(lz_), dealias(dealias_) {
    auto bad = [](const std::string& m) { throw std::invalid_argument("GridSpec: " + m); };
    if (nx <= 0 || ny <= 0 || nz <= 0 || nx % 2 || ny % 2 || nz % 2)
        bad("dimensions must be positive and even");
    if (!(lx > 0.0) || !(ly > 0.0) || !(lz > 0.0)) bad("box lengths must be positive");
    if (!(dealias > 0.0) || dealias > 1.0) bad("dealias fraction must lie in (0,1]");
}

bool GridSpec::in_dealias_band(int ix, int iy, int iz) const {
    const double tol = 1e-9;
    return std::abs(mode_of(ix, nx)) <= dealias * nx / 2.0 + tol &&
           std::abs(mode_of(iy, ny)) <= dealias * ny / 2.0 + tol &&
           std::abs(mode_of(iz, nz)) <= dealias * nz / 2.0 + tol;
}

bool GridSpec::operator==(const GridSpec& o) const {
    return nx == o.nx && ny == o.ny && nz == o.nz && lx == o.lx && ly == o.ly &&
           lz == o.lz && dealias == o.dealias;
}

// ============================================================================
// FFT plumbing (cached FFTW plans, unaligned so any buffer works)
// ============================================================================

namespace {

struct PlanKey {
    std::vector<int> dims;
    int sign;
    bool operator<(const PlanKey& o) const {
        if (dims != o.dims) return dims < o.dims;
        return sign < o.sign;
    }
};

class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache c;
        return c;
    }

    fftw_plan get(const std::vector<int>& dims, int sign) {
        std::lock_guard<std::mutex> lock(mu_);
        PlanKey key{dims, sign};
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;

        std::size_t n = 1;
        for (int d : dims) n *= std::size_t(d);
        fftw_complex* buf_in = fftw_alloc_complex(n);
        fftw_complex* buf_out = fftw_alloc_complex(n);
        fftw_plan p = fftw_plan_dft(int(dims.size()), dims.data(), buf_in, buf_out, sign,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(buf_in);
        fftw_free(buf_out);
        if (!p) throw std::runtime_error("fftw_plan_dft failed");
        plans_.emplace(key, p);
        return p;
    }

private:
    std::map<PlanKey, fftw_plan> plans_;
    std::mutex mu_;
};

void dft(const std::vector<int>& dims, const cplx* in, cplx* out, int sign) {
    fftw_plan p = PlanCache::instance().get(dims, sign);
    // Out-of-place c2c preserves its input; const_cast is safe here.
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

} // namespace

// Shared by the 2D modules (declared in their headers).
void dft_any(const std::vector<int>& dims, const cplx* in, cplx* out, bool forward) {
    dft(dims, in, out, forward ? FFTW_FORWARD : FFTW_BACKWARD);
}

std::vector<cplx> to_physical(const SpectralField& f) {
    std::vector<cplx> out(f.spec.size());
    dft({f.spec.nx, f.spec.ny, f.spec.nz}, f.a.data(), out.data(), FFTW_BACKWARD);
    return out;
}

SpectralField to_spectral(const std::vector<cplx>& phys, const GridSpec& spec, Frame frame,
                          double t_remap) {
    if (phys.size() != spec.size())
        throw std::invalid_argument("to_spectral: array size does not match grid");
    SpectralField f(spec, frame, t_remap);
    dft({spec.nx, spec.ny, spec.nz}, phys.data(), f.a.data(), FFTW_FORWARD);
    const double scale = 1.0 / double(spec.size());
    for (auto& c : f.a) c *= scale;
    return f;
}

void apply_dealias(SpectralField& f) {
    const GridSpec& s = f.spec;
    for (int ix = 0; ix < s.nx; ++ix)
        for (int iy = 0; iy < s.ny; ++iy)
            for (int iz = 0; iz < s.nz; ++iz)
                if (!s.in_dealias_band(ix, iy, iz)) f.at(ix, iy, iz) = 0.0;
}

SpectralField multiply_dealiased(const SpectralField& f, const SpectralField& g) {
    if (!(f.spec == g.spec))
        throw std::invalid_argument("multiply_dealiased: mismatched grids");
    auto fp = to_physical(f);
    const auto gp = to_physical(g);
    for (std::size_t i = 0; i < fp.size(); ++i) fp[i] *= gp[i];
    SpectralField out = to_spectral(fp, f.spec, f.frame, f.t_remap);
    apply_dealias(out);
    return out;
}

void hermitianize(SpectralField& f) {
    const GridSpec& s = f.spec;
    for (int ix = 0; ix < s.nx; ++ix) {
        const int jx = (s.nx - ix) % s.nx;
        for (int iy = 0; iy < s.ny; ++iy) {
            const int jy = (s.ny - iy) % s.ny;
            for (int iz = 0; iz < s.nz; ++iz) {
                const int jz = (s.nz - iz) % s.nz;
                const std::size_t i = s.idx(ix, iy, iz), j = s.idx(jx, jy, jz);
                if (i > j) continue;
                const cplx avg = 0.5 * (f.a[i] + std::conj(f.a[j]));
                f.a[i] = avg;
                f.a[j] = std::conj(avg);
            }
        }
    }
}

double hermitian_defect(const SpectralField& f) {
    const GridSpec& s = f.spec;
    double worst = 0.0;
    for (int ix = 0; ix < s.nx; ++ix) {
        const int jx = (s.nx - ix) % s.nx;
        for (int iy = 0; iy < s.ny; ++iy) {
            const int jy = (s.ny - iy) % s.ny;
            for (int iz = 0; iz < s.nz; ++iz) {
                const int jz = (s.nz - iz) % s.nz;
                worst = std::max(worst, std::abs(f.at(ix, iy, iz) -
                                                 std::conj(f.at(jx, jy, jz))));
            }
        }
    }
    return worst;
}

// ============================================================================
// Norms
// ============================================================================

double gevrey_norm(const SpectralField& f, double lambda, double sigma, double s) {
    if (lambda < 0.0) throw std::invalid_argument("gevrey_norm: lambda must be >= 0");
    if (!(s > 0.0) || s > 1.0) throw std::invalid_argument("gevrey_norm: s must lie in (0,1]");
    const GridSpec& g = f.spec;
    const double log_max = 700.0;  // headroom below log(DBL_MAX) ~ 709.8
    double sum = 0.0;
    for (int ix = 0; ix < g.nx; ++ix)
        for (int iy = 0; iy < g.ny; ++iy)
            for (int iz = 0; iz < g.nz; ++iz) {
                const double mag = std::abs(f.at(ix, iy, iz));
                if (mag == 0.0) continue;
                const double k = g.kx(ix), eta = g.eta(iy), l = g.kz(iz);
                const double log_term = 2.0 * lambda * std::pow(l1norm(k, eta, l), s) +
                                        2.0 * sigma * std::log(jb3(k, eta, l)) +
                                        2.0 * std::log(mag);
                if (log_term > log_max)
                    throw std::range_error("gevrey_norm: term overflows double range at mode (" +
                                           std::to_string(GridSpec::mode_of(ix, g.nx)) + "," +
                                           std::to_string(GridSpec::mode_of(iy, g.ny)) + "," +
                                           std::to_string(GridSpec::mode_of(iz, g.nz)) + ")");
                sum += std::exp(log_term);
            }
    sum *= 2.0 * pi / g.ly;
    if (!std::isfinite(sum)) throw std::range_error("gevrey_norm: sum overflows double range");
    return std::sqrt(sum);
}

double l2_norm(const SpectralField& f) {
    double sum = 0.0;
    for (const auto& c : f.a) sum += std::norm(c);
    return std::sqrt(sum * 2.0 * pi / f.spec.ly);
}

double energy(const VectorField& v) {
    double e = 0.0;
    for (int i = 0; i < 3; ++i) e += sq(l2_norm(v[i]));
    return e;
}

// ============================================================================
// Projection and remap
// ============================================================================

VectorField project_divergence_free(const VectorField& v, double t) {
    VectorField out = v;
    const GridSpec& s = v.spec();
    const double tau = t - v.t_remap();
    for (int ix = 0; ix < s.nx; ++ix)
        for (int iy = 0; iy < s.ny; ++iy)
            for (int iz = 0; iz < s.nz; ++iz) {
                const double k = s.kx(ix), l = s.kz(iz);
                const double e = s.eta(iy) - tau * k;
                const double m2 = k * k + e * e + l * l;
                if (m2 == 0.0) continue;  // mean mode untouched
                const std::size_t id = s.idx(ix, iy, iz);
                const cplx dot = k * out[0].a[id] + e * out[1].a[id] + l * out[2].a[id];
                out[0].a[id] -= k * dot / m2;
                out[1].a[id] -= e * dot / m2;
                out[2].a[id] -= l * dot / m2;
            }
    return out;
}

double divergence_max(const VectorField& v, double t) {
    const GridSpec& s = v.spec();
    const double tau = t - v.t_remap();
    double worst = 0.0;
    for (int ix = 0; ix < s.nx; ++ix)
        for (int iy = 0; iy < s.ny; ++iy)
            for (int iz = 0; iz < s.nz; ++iz) {
                const double k = s.kx(ix), l = s.kz(iz);
                const double e = s.eta(iy) - tau * k;
                const std::size_t id = s.idx(ix, iy, iz);
                worst = std::max(worst, std::abs(k * v[0].a[id] + e * v[1].a[id] +
                                                 l * v[2].a[id]));
            }
    return worst;
}

RemapResult remap(const VectorField& v, double t) {
    const GridSpec& s = v.spec();
    const double r = (t - v.t_remap()) * s.ly / s.lx;
    const long j = std::lround(r);
    if (std::abs(r - double(j)) > 1e-9 * std::max(1.0, std::abs(r)))
        throw std::invalid_argument(
            "remap: t - t_remap must be an integer multiple of Lx/Ly (got shift " +
            std::to_string(r) + " cells per x-mode)");

    RemapResult res;
    res.field = VectorField(s, v[0].frame, t);
    const double weight = 2.0 * pi / s.ly;
    for (int ix = 0; ix < s.nx; ++ix) {
        const long mk = GridSpec::mode_of(ix, s.nx);
        for (int iy = 0; iy < s.ny; ++iy) {
            const long my = GridSpec::mode_of(iy, s.ny) - mk * j;
            const bool keep = my >= -s.ny / 2 && my <= s.ny / 2 - 1;
            for (int iz = 0; iz < s.nz; ++iz)
                for (int c = 0; c < 3; ++c) {
                    const cplx val = v[c].at(ix, iy, iz);
                    if (val == cplx(0.0, 0.0)) continue;
                    if (keep)
                        res.field[c].at(ix, GridSpec::index_of(int(my), s.ny), iz) = val;
                    else
                        res.dropped_energy += weight * std::norm(val);
                }
        }
    }
    return res;
}

// ============================================================================
// Snapshot I/O
// ============================================================================

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), 4);
}
void put_f64(std::ostream& os, double v) {
    os.write(reinterpret_cast<const char*>(&v), 8);
}
std::uint32_t get_u32(const char* p) {
    std::uint32_t v;
    std::memcpy(&v, p, 4);
    return v;
}
double get_f64(const char* p) {
    double v;
    std::memcpy(&v, p, 8);
    return v;
}

constexpr std::uint32_t snapshot_format_version = 1;
constexpr std::size_t header_bytes = 37;  // magic+version+dims + frame + t + t_remap

} // namespace

void write_snapshot(const std::string& path, const SpectralField& f, double t) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("write_snapshot: cannot open " + path);
    os.write("C3DF", 4);
    put_u32(os, snapshot_format_version);
    put_u32(os, std::uint32_t(f.spec.nx));
    put_u32(os, std::uint32_t(f.spec.ny));
    put_u32(os, std::uint32_t(f.spec.nz));
    const char tag = char(f.frame);
    os.write(&tag, 1);
    put_f64(os, t);
    put_f64(os, f.t_remap);
    os.write(reinterpret_cast<const char*>(f.a.data()),
             std::streamsize(f.a.size() * sizeof(cplx)));
    if (!os) throw std::runtime_error("write_snapshot: write failed for " + path);
}

Snapshot read_snapshot(const std::string& path, const GridSpec& box_template) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_snapshot: cannot open " + path);
    is.seekg(0, std::ios::end);
    const std::size_t file_size = std::size_t(is.tellg());
    is.seekg(0);
    if (file_size < header_bytes)
        throw std::runtime_error("read_snapshot: " + path + ": truncated header at offset " +
                                 std::to_string(file_size) + " (need 37 bytes)");
    char hdr[header_bytes];
    is.read(hdr, header_bytes);
    if (std::memcmp(hdr, "C3DF", 4) != 0)
        throw std::runtime_error("read_snapshot: " + path + ": bad magic at offset 0");
    const std::uint32_t version = get_u32(hdr + 4);
    if (version != snapshot_format_version)
        throw std::runtime_error("read_snapshot: " + path + ": unsupported format version " +
                                 std::to_string(version) + " at offset 4");
    const std::uint32_t nx = get_u32(hdr + 8), ny = get_u32(hdr + 12), nz = get_u32(hdr + 16);
    if (nx == 0 || ny == 0 || nz == 0 || nx % 2 || ny % 2 || nz % 2 || nx > 65536 ||
        ny > 65536 || nz > 65536)
        throw std::runtime_error("read_snapshot: " + path +
                                 ": implausible dimensions at offset 8");
    const char tag = hdr[20];
    if (tag != 0 && tag != 1)
        throw std::runtime_error("read_snapshot: " + path + ": bad frame tag at offset 20");

    GridSpec spec(int(nx), int(ny), int(nz), box_template.lx, box_template.ly,
                  box_template.lz, box_template.dealias);
    const std::size_t expect = header_bytes + spec.size() * sizeof(cplx);
    if (file_size != expect)
        throw std::runtime_error("read_snapshot: " + path + ": payload size mismatch at offset " +
                                 std::to_string(header_bytes) + " (expected " +
                                 std::to_string(expect) + " bytes, file has " +
                                 std::to_string(file_size) + ")");

    Snapshot snap;
    snap.field = SpectralField(spec, Frame(tag), get_f64(hdr + 29));
    snap.t = get_f64(hdr + 21);
    is.read(reinterpret_cast<char*>(snap.field.a.data()),
            std::streamsize(spec.size() * sizeof(cplx)));
    if (!is) throw std::runtime_error("read_snapshot: " + path + ": read failed in payload");
    return snap;
}

} // namespace c3d
