#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lobsig/rng.hpp"

namespace testutil {

inline Eigen::MatrixXd make_mat(int n, int p, const std::vector<double>& row_major) {
    Eigen::MatrixXd X(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) X(i, j) = row_major[static_cast<std::size_t>(i * p + j)];
    return X;
}

/// Deterministic Gaussian cloud; per-column scales default to 1.
inline Eigen::MatrixXd gauss(int n, int p, std::uint64_t seed,
                             const std::vector<double>& scales = {}) {
    lobsig::Rng rng(seed);
    Eigen::MatrixXd X(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) {
            double s = scales.empty() ? 1.0 : scales[static_cast<std::size_t>(j)];
            X(i, j) = s * rng.normal();
        }
    return X;
}

/// Xp.row(i) = X.row(perm[i])
inline Eigen::MatrixXd apply_perm(const Eigen::MatrixXd& X, const std::vector<int>& perm) {
    Eigen::MatrixXd Xp(X.rows(), X.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i) Xp.row(i) = X.row(perm[static_cast<std::size_t>(i)]);
    return Xp;
}

inline std::vector<int> random_perm(int n, std::uint64_t seed) {
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    lobsig::Rng rng(seed);
    for (int i = n - 1; i > 0; --i)
        std::swap(perm[static_cast<std::size_t>(i)],
                  perm[rng.uniform_index(static_cast<std::size_t>(i) + 1)]);
    return perm;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Unique scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        std::string tmpl = (std::filesystem::temp_directory_path() / "lobsig_test_XXXXXX").string();
        std::vector<char> buf(tmpl.begin(), tmpl.end());
        buf.push_back('\0');
        if (!mkdtemp(buf.data())) throw std::runtime_error("mkdtemp failed");
        path_ = buf.data();
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace testutil
