#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lobsig/features.hpp"

namespace lobsig {

enum class DetectorKind { EC, MCD, EE, HBOS, OCSVM, DBSCAN, OPTICS, ISOF, LOF, CBLOF, KMEANS, KNN, SOD };

inline constexpr DetectorKind kAllDetectorKinds[] = {
    DetectorKind::EC,    DetectorKind::MCD,    DetectorKind::EE,  DetectorKind::HBOS,
    DetectorKind::OCSVM, DetectorKind::DBSCAN, DetectorKind::OPTICS, DetectorKind::ISOF,
    DetectorKind::LOF,   DetectorKind::CBLOF,  DetectorKind::KMEANS, DetectorKind::KNN,
    DetectorKind::SOD};

const char* to_string(DetectorKind k);
std::optional<DetectorKind> detector_kind_from_string(const std::string& name);

// --- Per-kind parameter records. A zero placeholder means "derive the
// --- documented default from the data" (bins from n, gamma from variance,
// --- eps/minPts from dimensionality).

struct EcParams {
    double label_percentile = 97.5;  // native labels above this percentile of d^2
};

struct McdParams {
    double contamination = 0.05;  // alpha; h = floor(n * (1 - alpha))
    int n_starts = 500;           // random (p+1)-subsets
    int refine_best = 10;         // candidates iterated to convergence
    double cstep_tol = 1e-7;      // relative determinant change
    int max_csteps = 200;
};

struct EeParams {
    McdParams core;  // reweighting cutoff is the chi2 0.975 quantile
};

struct HbosParams {
    int bins = 0;  // 0 -> ceil(sqrt(n))
    double density_floor = 1e-12;
    double native_quantile = 0.95;
};

struct OcsvmParams {
    double nu = 0.05;
    double gamma = 0.0;  // 0 -> 1 / (p * total variance)
    double tol = 1e-6;   // max KKT violation
    int max_iter = 10000;  // outer optimization sweeps
};

struct DbscanParams {
    double eps = 0.0;  // 0 -> 90th percentile of the minPts-distance
    int min_pts = 0;   // 0 -> 2p
};

struct OpticsParams {
    int min_pts = 0;  // 0 -> 2p
    double label_quantile = 0.95;
};

struct IsofParams {
    int n_trees = 100;
    int subsample = 256;  // clamped to n
    double native_quantile = 0.95;
};

struct LofParams {
    int k = 20;
    double label_threshold = 1.5;
};

struct CblofParams {
    int n_clusters = 8;
    double alpha = 0.9;  // large-cluster mass fraction
    double beta = 5.0;   // large/small size ratio
    bool weighted = false;
    double tol = 1e-6;
    int max_iter = 300;
    double native_quantile = 0.95;
};

struct KmeansParams {
    int n_clusters = 8;
    double tol = 1e-6;
    int max_iter = 300;
    double native_quantile = 0.95;
};

struct KnnParams {
    int k = 5;
    double native_quantile = 0.95;
};

struct SodParams {
    int ref_size = 20;          // l: reference-set size
    int snn_k = 20;             // neighbors used for shared-neighbor similarity
    double variance_frac = 0.8; // subspace: var < frac * mean reference variance
    double native_quantile = 0.95;
};

using DetectorParams =
    std::variant<EcParams, McdParams, EeParams, HbosParams, OcsvmParams, DbscanParams,
                 OpticsParams, IsofParams, LofParams, CblofParams, KmeansParams, KnnParams,
                 SodParams>;

struct DetectorSpec {
    DetectorKind kind;
    DetectorParams params;
    std::uint64_t seed = 0;

    static DetectorSpec defaults(DetectorKind kind, std::uint64_t seed = 0);
};

/// All thirteen detectors at documented defaults. Each gets a distinct
/// seed derived from `seed` so stochastic fits do not share streams.
std::vector<DetectorSpec> default_specs(std::uint64_t seed = 0);

/// One raw anomaly score per matrix row; higher is more anomalous for
/// every kind. Immutable after construction.
struct ScoreVector {
    DetectorSpec spec;
    std::vector<double> raw_scores;
    std::optional<std::vector<std::uint8_t>> native_labels;
    std::map<std::string, double> fit_metadata;  // kind-specific diagnostics
};

/// Fits one detector. Deterministic given (matrix, spec, seed); throws on
/// bad parameters, non-convergence, or irrecoverably singular covariance.
ScoreVector score(const FeatureMatrix& X, const DetectorSpec& spec);

struct DetectorOutcome {
    DetectorSpec spec;
    std::optional<ScoreVector> result;
    std::string error;  // set when result is empty

    bool ok() const { return result.has_value(); }
};

/// Fits every spec, isolating failures: a bad spec yields an error slot
/// without aborting the batch. Wall time per fit is recorded in
/// fit_metadata["wall_ms"].
std::vector<DetectorOutcome> run_all_detectors(const FeatureMatrix& X,
                                               const std::vector<DetectorSpec>& specs);

// --- Individual scorers (dispatched by score(); exposed for tests).
ScoreVector score_empirical_covariance(const FeatureMatrix& X, const DetectorSpec& spec);
ScoreVector score_mcd(const FeatureMatrix& X, const DetectorSpec& spec);
ScoreVector score_elliptic_envelope(const FeatureMatrix& X, const DetectorSpec& spec);
ScoreVector score_hbos(const FeatureMatrix& X, const DetectorSpec& spec);
ScoreVector score_ocsvm(const FeatureMatrix& X, const DetectorSpec& spec);
ScoreVector score_dbscan(const FeatureMatrix& X, const DetectorSpec& spec);
ScoreVector score_optics(const FeatureMatrix& X, const DetectorSpec& spec);
ScoreVector score_isolation_forest(const FeatureMatrix& X, const DetectorSpec& spec);
ScoreVector score_lof(const FeatureMatrix& X, const DetectorSpec& spec);
ScoreVector score_cblof(const FeatureMatrix& X, const DetectorSpec& spec);
ScoreVector score_kmeans(const FeatureMatrix& X, const DetectorSpec& spec);
ScoreVector score_knn(const FeatureMatrix& X, const DetectorSpec& spec);
ScoreVector score_sod(const FeatureMatrix& X, const DetectorSpec& spec);

/// Wraps a bare matrix in a FeatureMatrix (timestamps 0..n-1); used by
/// tests and tools that score data not derived from LOB records.
FeatureMatrix matrix_only(Eigen::MatrixXd values);

}  // namespace lobsig
