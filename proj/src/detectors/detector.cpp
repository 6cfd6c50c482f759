#include "lobsig/detectors/detector.hpp"

#include <chrono>
#include <stdexcept>

#include "lobsig/errors.hpp"
#include "lobsig/rng.hpp"

namespace lobsig {

const char* to_string(DetectorKind k) {
    switch (k) {
        case DetectorKind::EC: return "ec";
        case DetectorKind::MCD: return "mcd";
        case DetectorKind::EE: return "ee";
        case DetectorKind::HBOS: return "hbos";
        case DetectorKind::OCSVM: return "ocsvm";
        case DetectorKind::DBSCAN: return "dbscan";
        case DetectorKind::OPTICS: return "optics";
        case DetectorKind::ISOF: return "isoforest";
        case DetectorKind::LOF: return "lof";
        case DetectorKind::CBLOF: return "cblof";
        case DetectorKind::KMEANS: return "kmeans";
        case DetectorKind::KNN: return "knn";
        case DetectorKind::SOD: return "sod";
    }
    throw std::logic_error("unknown detector kind");
}

std::optional<DetectorKind> detector_kind_from_string(const std::string& name) {
    for (DetectorKind k : kAllDetectorKinds)
        if (name == to_string(k)) return k;
    // accept the short alias seen in some tooling
    if (name == "isof") return DetectorKind::ISOF;
    return std::nullopt;
}

DetectorSpec DetectorSpec::defaults(DetectorKind kind, std::uint64_t seed) {
    DetectorSpec s;
    s.kind = kind;
    s.seed = seed;
    switch (kind) {
        case DetectorKind::EC: s.params = EcParams{}; break;
        case DetectorKind::MCD: s.params = McdParams{}; break;
        case DetectorKind::EE: s.params = EeParams{}; break;
        case DetectorKind::HBOS: s.params = HbosParams{}; break;
        case DetectorKind::OCSVM: s.params = OcsvmParams{}; break;
        case DetectorKind::DBSCAN: s.params = DbscanParams{}; break;
        case DetectorKind::OPTICS: s.params = OpticsParams{}; break;
        case DetectorKind::ISOF: s.params = IsofParams{}; break;
        case DetectorKind::LOF: s.params = LofParams{}; break;
        case DetectorKind::CBLOF: s.params = CblofParams{}; break;
        case DetectorKind::KMEANS: s.params = KmeansParams{}; break;
        case DetectorKind::KNN: s.params = KnnParams{}; break;
        case DetectorKind::SOD: s.params = SodParams{}; break;
    }
    return s;
}

std::vector<DetectorSpec> default_specs(std::uint64_t seed) {
    std::vector<DetectorSpec> specs;
    specs.reserve(std::size(kAllDetectorKinds));
    for (DetectorKind k : kAllDetectorKinds)
        specs.push_back(DetectorSpec::defaults(k, mix64(seed, static_cast<std::uint64_t>(k) + 1)));
    return specs;
}

ScoreVector score(const FeatureMatrix& X, const DetectorSpec& spec) {
    if (X.rows() == 0) throw ValidationError("cannot score an empty feature matrix");
    switch (spec.kind) {
        case DetectorKind::EC: return score_empirical_covariance(X, spec);
        case DetectorKind::MCD: return score_mcd(X, spec);
        case DetectorKind::EE: return score_elliptic_envelope(X, spec);
        case DetectorKind::HBOS: return score_hbos(X, spec);
        case DetectorKind::OCSVM: return score_ocsvm(X, spec);
        case DetectorKind::DBSCAN: return score_dbscan(X, spec);
        case DetectorKind::OPTICS: return score_optics(X, spec);
        case DetectorKind::ISOF: return score_isolation_forest(X, spec);
        case DetectorKind::LOF: return score_lof(X, spec);
        case DetectorKind::CBLOF: return score_cblof(X, spec);
        case DetectorKind::KMEANS: return score_kmeans(X, spec);
        case DetectorKind::KNN: return score_knn(X, spec);
        case DetectorKind::SOD: return score_sod(X, spec);
    }
    throw std::logic_error("unknown detector kind");
}

std::vector<DetectorOutcome> run_all_detectors(const FeatureMatrix& X,
                                               const std::vector<DetectorSpec>& specs) {
    std::vector<DetectorOutcome> out(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
        out[i].spec = specs[i];
        auto t0 = std::chrono::steady_clock::now();
        try {
            out[i].result = score(X, specs[i]);
        } catch (const std::exception& e) {
            out[i].error = e.what();
            continue;
        }
        auto t1 = std::chrono::steady_clock::now();
        out[i].result->fit_metadata["wall_ms"] =
            std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
    return out;
}

FeatureMatrix matrix_only(Eigen::MatrixXd values) {
    FeatureMatrix fm;
    const auto n = values.rows();
    const auto p = values.cols();
    fm.values = std::move(values);
    fm.col_names.resize(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j) fm.col_names[static_cast<std::size_t>(j)] = "x" + std::to_string(j);
    fm.col_means = Eigen::VectorXd::Zero(p);
    fm.col_stds = Eigen::VectorXd::Ones(p);
    fm.row_timestamps.resize(static_cast<std::size_t>(n));
    fm.row_record_index.resize(static_cast<std::size_t>(n));
    fm.raw_momentum.assign(static_cast<std::size_t>(n), 0.0);
    fm.raw_close.assign(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        fm.row_timestamps[static_cast<std::size_t>(i)] = static_cast<TimestampMs>(i);
        fm.row_record_index[static_cast<std::size_t>(i)] = static_cast<std::size_t>(i);
    }
    return fm;
}

}  // namespace lobsig
