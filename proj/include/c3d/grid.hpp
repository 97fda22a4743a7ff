#pragma once

// Spectral grid backbone: triply periodic box, complex spectral fields in the
// tilted (shear-following) frame, transforms, dealiasing, the moving-frame
// wavenumber bookkeeping, Gevrey norms, solenoidal projection, and remapping.

#include "c3d/common.hpp"

#include <array>
#include <functional>

namespace c3d {

// ============================================================================
// GridSpec
// ============================================================================

struct GridSpec {
    int nx = 0, ny = 0, nz = 0;            // even, >= 4
    double lx = 2.0 * pi;
    double ly = 4.0 * pi;
    double lz = 2.0 * pi;
    double dealias = 2.0 / 3.0;            // in (0,1]; keep |index| <= dealias*N/2

    GridSpec() = default;
    GridSpec(int nx_, int ny_, int nz_, double lx_ = 2.0 * pi, double ly_ = 4.0 * pi,
             double lz_ = 2.0 * pi, double dealias_ = 2.0 / 3.0);

    std::size_t size() const { return std::size_t(nx) * ny * nz; }
    std::size_t idx(int ix, int iy, int iz) const {
        return (std::size_t(ix) * ny + iy) * nz + iz;
    }

    // Signed integer mode number for a storage index (FFT-natural order).
    static int mode_of(int i, int n) { return i < (n + 1) / 2 ? i : i - n; }
    static int index_of(int m, int n) { return m >= 0 ? m : m + n; }

    // Physical wavenumbers.
    double kx(int ix) const { return 2.0 * pi * mode_of(ix, nx) / lx; }
    double eta(int iy) const { return 2.0 * pi * mode_of(iy, ny) / ly; }
    double kz(int iz) const { return 2.0 * pi * mode_of(iz, nz) / lz; }

    // Collocation points.
    double x(int ix) const { return lx * ix / nx; }
    double y(int iy) const { return ly * iy / ny; }
    double z(int iz) const { return lz * iz / nz; }

    bool in_dealias_band(int ix, int iy, int iz) const;
    bool operator==(const GridSpec& o) const;
};

// ============================================================================
// Fields
// ============================================================================

enum class Frame : std::uint8_t { lab = 0, shear = 1 };

// One complex scalar field in spectral representation, row-major with the
// x-wavenumber outermost and the z-wavenumber innermost.
struct SpectralField {
    GridSpec spec;
    Frame frame = Frame::shear;
    double t_remap = 0.0;
    std::vector<cplx> a;

    SpectralField() = default;
    explicit SpectralField(const GridSpec& s, Frame f = Frame::shear, double tr = 0.0)
        : spec(s), frame(f), t_remap(tr), a(s.size(), cplx(0.0, 0.0)) {}

    cplx& at(int ix, int iy, int iz) { return a[spec.idx(ix, iy, iz)]; }
    const cplx& at(int ix, int iy, int iz) const { return a[spec.idx(ix, iy, iz)]; }
};

struct VectorField {
    std::array<SpectralField, 3> u;

    VectorField() = default;
    explicit VectorField(const GridSpec& s, Frame f = Frame::shear, double tr = 0.0)
        : u{SpectralField(s, f, tr), SpectralField(s, f, tr), SpectralField(s, f, tr)} {}

    const GridSpec& spec() const { return u[0].spec; }
    double t_remap() const { return u[0].t_remap; }
    void set_t_remap(double tr) { for (auto& f : u) f.t_remap = tr; }
    SpectralField& operator[](int i) { return u[i]; }
    const SpectralField& operator[](int i) const { return u[i]; }
};

// ============================================================================
// Moving-frame symbols
// ============================================================================

// Effective lab-frame wavenumber of a tilted-frame mode after shearing for
// time tau: (k, eta - tau*k, l).
inline std::array<double, 3> shear_wavenumber(double k, double eta, double l, double tau) {
    return {k, eta - tau * k, l};
}

// Symbol of the shear-frame Laplacian: -(k^2 + (eta - tau k)^2 + l^2).
inline double laplacian_l_symbol(double k, double eta, double l, double tau) {
    const double e = eta - tau * k;
    return -(k * k + e * e + l * l);
}

// ============================================================================
// Transforms and products
// ============================================================================

// Raw cached-plan DFT over an arbitrary-rank array (dims row-major). Used by
// the 2D modules; in and out must be distinct buffers of prod(dims) entries.
void dft_any(const std::vector<int>& dims, const cplx* in, cplx* out, bool forward);

// Spectral -> physical collocation values (unnormalized inverse DFT of Fourier
// series coefficients). Output is complex storage; real fields stay real up to
// roundoff when coefficients are Hermitian-symmetric.
std::vector<cplx> to_physical(const SpectralField& f);

// Physical collocation values -> Fourier series coefficients (forward DFT / N).
SpectralField to_spectral(const std::vector<cplx>& phys, const GridSpec& spec,
                          Frame frame = Frame::shear, double t_remap = 0.0);

// Zero every mode outside the dealias band.
void apply_dealias(SpectralField& f);

// Dealiased pointwise product of two spectral fields (pseudo-spectral).
SpectralField multiply_dealiased(const SpectralField& f, const SpectralField& g);

// Enforce Hermitian symmetry a(-m) = conj(a(m)) by averaging conjugate pairs.
void hermitianize(SpectralField& f);

// Max deviation from Hermitian symmetry (diagnostic).
double hermitian_defect(const SpectralField& f);

// ============================================================================
// Norms
// ============================================================================

// Gevrey-Sobolev norm: sqrt( sum_{k,l} (2*pi/Ly) sum_eta |a|^2
//     * exp(2*lambda*(|k|+|eta|+|l|)^s) * <k,eta,l>^(2*sigma) ).
// Throws std::range_error if a term's exponent overflows double range.
double gevrey_norm(const SpectralField& f, double lambda, double sigma, double s);

// Plain L2 norm (gevrey_norm at lambda = sigma = 0) and its square.
double l2_norm(const SpectralField& f);
double energy(const VectorField& v);   // sum of squared component L2 norms

// ============================================================================
// Projection and remap
// ============================================================================

// Remove the compressible part with respect to the time-dependent wavenumber
// k~ = shear_wavenumber(., t - t_remap). The (0,0,0) mode is left untouched.
VectorField project_divergence_free(const VectorField& v, double t);

// Max |k~ . u| over modes (diagnostic for the solenoidal invariant).
double divergence_max(const VectorField& v, double t);

struct RemapResult {
    VectorField field;
    double dropped_energy = 0.0;   // energy of modes shifted off the eta grid
};

// Re-express the field with t_remap = t. Requires (t - t_remap)*Ly/Lx integral
// so every mode lands exactly on the eta lattice; throws otherwise.
RemapResult remap(const VectorField& v, double t);

// ============================================================================
// Snapshot I/O
// ============================================================================
// Layout (little-endian):
//   bytes 0..3   magic "C3DF"
//   bytes 4..7   format version (u32) = 1
//   bytes 8..19  Nx, Ny, Nz (u32 each)
//   byte  20     frame tag (0 = lab, 1 = shear)
//   bytes 21..28 t (f64)
//   bytes 29..36 t_remap (f64)
//   then Nx*Ny*Nz complex coefficients, row-major (x outer, y middle, z inner),
//   each an interleaved (re, im) f64 pair.

struct Snapshot {
    SpectralField field;
    double t = 0.0;
};

// The file stores dimensions only; box lengths and the dealias fraction are
// run-config data, so the reader takes them as a template (dims are replaced
// by the file's). Malformed files raise std::runtime_error naming the offset.
void write_snapshot(const std::string& path, const SpectralField& f, double t);
Snapshot read_snapshot(const std::string& path, const GridSpec& box_template = GridSpec());

} // namespace c3d
