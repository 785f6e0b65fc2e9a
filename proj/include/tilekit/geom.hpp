#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace tilekit {

// Points and d x d matrices in R^d. The dimension is a runtime value but
// storage is fixed so the hot loops stay allocation-free. Everything shipped
// lives in d <= 3; higher dimensions fail loudly.
constexpr int kMaxDim = 3;

struct Vec {
    double c[kMaxDim]{0.0, 0.0, 0.0};
    int dim = 1;

    Vec() = default;
    explicit Vec(int d) : dim(d) {}
    Vec(int d, double x, double y = 0.0, double z = 0.0) : dim(d) {
        c[0] = x;
        c[1] = y;
        c[2] = z;
    }
    static Vec zero(int d) { return Vec(d); }

    double& operator[](int i) { return c[i]; }
    double operator[](int i) const { return c[i]; }
};

inline void check_dim(int d) {
    if (d < 1 || d > kMaxDim)
        throw std::invalid_argument("dimension must be in 1.." + std::to_string(kMaxDim));
}

inline Vec operator+(const Vec& a, const Vec& b) {
    Vec r(a.dim);
    for (int i = 0; i < a.dim; ++i) r.c[i] = a.c[i] + b.c[i];
    return r;
}
inline Vec operator-(const Vec& a, const Vec& b) {
    Vec r(a.dim);
    for (int i = 0; i < a.dim; ++i) r.c[i] = a.c[i] - b.c[i];
    return r;
}
inline Vec operator*(double s, const Vec& a) {
    Vec r(a.dim);
    for (int i = 0; i < a.dim; ++i) r.c[i] = s * a.c[i];
    return r;
}
inline Vec operator-(const Vec& a) { return -1.0 * a; }

inline double dot(const Vec& a, const Vec& b) {
    double s = 0;
    for (int i = 0; i < a.dim; ++i) s += a.c[i] * b.c[i];
    return s;
}
inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }
inline double dist(const Vec& a, const Vec& b) { return norm(a - b); }

inline double max_abs(const Vec& a) {
    double m = 0;
    for (int i = 0; i < a.dim; ++i) m = std::max(m, std::abs(a.c[i]));
    return m;
}

// Lexicographic order with a tolerance; used to pick canonical anchors.
inline bool lex_less(const Vec& a, const Vec& b, double tol = 0.0) {
    for (int i = 0; i < a.dim; ++i) {
        if (a.c[i] < b.c[i] - tol) return true;
        if (a.c[i] > b.c[i] + tol) return false;
    }
    return false;
}

inline bool approx_eq(const Vec& a, const Vec& b, double tol) {
    for (int i = 0; i < a.dim; ++i)
        if (std::abs(a.c[i] - b.c[i]) > tol) return false;
    return true;
}

// Integer cell key, also used to bucket real vectors at resolution q.
struct CellKey {
    std::int64_t k[kMaxDim]{0, 0, 0};

    bool operator==(const CellKey& o) const {
        return k[0] == o.k[0] && k[1] == o.k[1] && k[2] == o.k[2];
    }
    bool operator<(const CellKey& o) const {
        for (int i = 0; i < kMaxDim; ++i) {
            if (k[i] != o.k[i]) return k[i] < o.k[i];
        }
        return false;
    }
};

inline CellKey quantize(const Vec& v, double q) {
    CellKey ck;
    for (int i = 0; i < v.dim; ++i) ck.k[i] = llround(v.c[i] / q);
    return ck;
}

struct CellKeyHash {
    std::size_t operator()(const CellKey& ck) const {
        std::uint64_t h = 1469598103934665603ull;
        for (int i = 0; i < kMaxDim; ++i) {
            std::uint64_t x = static_cast<std::uint64_t>(ck.k[i]);
            for (int b = 0; b < 8; ++b) {
                h ^= (x >> (8 * b)) & 0xff;
                h *= 1099511628211ull;
            }
        }
        return static_cast<std::size_t>(h);
    }
};

struct Mat {
    double a[kMaxDim * kMaxDim]{};
    int dim = 1;

    Mat() = default;
    explicit Mat(int d) : dim(d) {}

    double& at(int i, int j) { return a[i * dim + j]; }
    double at(int i, int j) const { return a[i * dim + j]; }

    static Mat identity(int d) {
        Mat m(d);
        for (int i = 0; i < d; ++i) m.at(i, i) = 1.0;
        return m;
    }
    static Mat scalar(int d, double s) {
        Mat m(d);
        for (int i = 0; i < d; ++i) m.at(i, i) = s;
        return m;
    }
};

inline Vec apply(const Mat& m, const Vec& v) {
    Vec r(m.dim);
    for (int i = 0; i < m.dim; ++i) {
        double s = 0;
        for (int j = 0; j < m.dim; ++j) s += m.at(i, j) * v.c[j];
        r.c[i] = s;
    }
    return r;
}

inline Mat mul(const Mat& x, const Mat& y) {
    Mat r(x.dim);
    for (int i = 0; i < x.dim; ++i)
        for (int j = 0; j < x.dim; ++j) {
            double s = 0;
            for (int l = 0; l < x.dim; ++l) s += x.at(i, l) * y.at(l, j);
            r.at(i, j) = s;
        }
    return r;
}

inline Mat mat_pow(const Mat& m, int p) {
    Mat r = Mat::identity(m.dim);
    for (int i = 0; i < p; ++i) r = mul(r, m);
    return r;
}

inline double det(const Mat& m) {
    switch (m.dim) {
        case 1:
            return m.at(0, 0);
        case 2:
            return m.at(0, 0) * m.at(1, 1) - m.at(0, 1) * m.at(1, 0);
        default:
            return m.at(0, 0) * (m.at(1, 1) * m.at(2, 2) - m.at(1, 2) * m.at(2, 1)) -
                   m.at(0, 1) * (m.at(1, 0) * m.at(2, 2) - m.at(1, 2) * m.at(2, 0)) +
                   m.at(0, 2) * (m.at(1, 0) * m.at(2, 1) - m.at(1, 1) * m.at(2, 0));
    }
}

inline Mat inverse(const Mat& m) {
    double d = det(m);
    if (std::abs(d) < 1e-300) throw std::domain_error("matrix not invertible");
    Mat r(m.dim);
    if (m.dim == 1) {
        r.at(0, 0) = 1.0 / d;
    } else if (m.dim == 2) {
        r.at(0, 0) = m.at(1, 1) / d;
        r.at(0, 1) = -m.at(0, 1) / d;
        r.at(1, 0) = -m.at(1, 0) / d;
        r.at(1, 1) = m.at(0, 0) / d;
    } else {
        // adjugate / det
        auto cof = [&](int i, int j) {
            int r0 = (i + 1) % 3, r1 = (i + 2) % 3;
            int c0 = (j + 1) % 3, c1 = (j + 2) % 3;
            return m.at(r0, c0) * m.at(r1, c1) - m.at(r0, c1) * m.at(r1, c0);
        };
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.at(j, i) = cof(i, j) / d;
    }
    return r;
}

// Operator norm bounds via Frobenius; exact singular values live in
// expansion.cpp (Eigen). These are cheap and sufficient for bounding boxes.
inline double frobenius(const Mat& m) {
    double s = 0;
    for (int i = 0; i < m.dim * m.dim; ++i) s += m.a[i] * m.a[i];
    return std::sqrt(s);
}

// FNV-1a over bytes; used for stable content hashes (labels, digit systems).
inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t seed = 1469598103934665603ull) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}
inline std::uint64_t fnv1a(const std::string& s, std::uint64_t seed = 1469598103934665603ull) {
    return fnv1a(s.data(), s.size(), seed);
}

}  // namespace tilekit
