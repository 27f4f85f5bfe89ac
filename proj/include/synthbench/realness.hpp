#pragma once

#include <cstdint>
#include <exception>
#include <string>
#include <vector>

#include "synthbench/dataset.hpp"
#include "synthbench/forest.hpp"
#include "synthbench/generator.hpp"
#include "synthbench/metrics.hpp"

namespace synthbench {

// Which part of the training data is replaced by synthetic instances.
enum class ProblemKind { real, synth_regular, synth_outliers, synth };

inline std::string to_string(ProblemKind p) {
    switch (p) {
        case ProblemKind::real: return "Real";
        case ProblemKind::synth_regular: return "SynthRegular";
        case ProblemKind::synth_outliers: return "SynthOutliers";
        case ProblemKind::synth: return "Synth";
    }
    return "?";
}

// How synthetic outliers are produced for SynthOutliers: as a characterizable
// deviation from the regular-instance model, or by fitting the genuine
// outliers themselves.
enum class OutlierVariant { characterizable, reconstructed };

inline std::string to_string(OutlierVariant v) {
    return v == OutlierVariant::characterizable ? "characterizable" : "reconstructed";
}

struct RealnessOptions {
    int ntrees = 100;
    double train_fraction = 0.7;
    GenParams gen;
};

struct RealnessResult {
    std::string problem;
    std::string generator_id;
    std::string variant;
    double kappa = 0.0;
    double kappa_drop = 0.0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string note;
};

namespace realness_detail {

// Replace the rows of one class with model samples, preserving exact counts
// and positions.
inline void replace_class(LabeledDataset& train, Label cls, const GenerativeModel& model,
                          std::uint64_t seed) {
    const std::vector<std::size_t> idx = train.indices_of(cls);
    const Matrix fresh = model.gen(idx.size(), seed);
    for (std::size_t r = 0; r < idx.size(); ++r) {
        for (std::size_t j = 0; j < train.dim(); ++j) {
            train.instances(idx[r], j) = fresh(r, j);
        }
    }
}

inline LabeledDataset class_subset(const LabeledDataset& data, Label cls) {
    return data.select(data.indices_of(cls));
}

inline double kappa_of(const Forest& forest, const LabeledDataset& test) {
    const std::vector<Label> pred = rf_predict(forest, test.instances);
    const KappaResult k = cohens_kappa(pred, test.labels);
    return k.defined ? k.kappa : 0.0;
}

}  // namespace realness_detail

// One run of the classifier-based realness protocol: stratified 70/30 split,
// problem transformation on the training half only, random forest, kappa on
// the untouched real test half. kappa_real, when supplied, fills kappa_drop
// without re-running the Real branch.
inline RealnessResult classify_protocol(const LabeledDataset& data, ProblemKind kind,
                                        const GeneratorPair& pair, OutlierVariant variant,
                                        std::uint64_t seed, const RealnessOptions& opt,
                                        const double* kappa_real = nullptr) {
    RealnessResult res;
    res.problem = to_string(kind);
    res.generator_id = (kind == ProblemKind::real) ? "-" : pair.id;
    res.variant = (kind == ProblemKind::synth_outliers) ? to_string(variant) : "";
    res.seed = seed;
    try {
        const SplitPair split = stratified_split(data, opt.train_fraction,
                                                 stable_hash64(seed, "split"));
        LabeledDataset train = split.train;

        const bool replace_regulars =
            kind == ProblemKind::synth_regular || kind == ProblemKind::synth;
        const bool replace_outliers =
            kind == ProblemKind::synth_outliers || kind == ProblemKind::synth;

        if (replace_regulars) {
            const LabeledDataset regs = realness_detail::class_subset(train, Label::regular);
            const LabeledDataset fitting =
                jitter(regs, stable_hash64(seed, "jitter_reg"), opt.gen.jitter_sd);
            const GenerativeModel model = fit_model(pair.regular, fitting.instances, opt.gen,
                                                    stable_hash64(seed, "fit_reg"));
            realness_detail::replace_class(train, Label::regular, model,
                                           stable_hash64(seed, "gen_reg"));
        }
        if (replace_outliers) {
            const bool reconstruct =
                kind == ProblemKind::synth_outliers && variant == OutlierVariant::reconstructed;
            if (reconstruct) {
                const LabeledDataset outs = realness_detail::class_subset(train, Label::outlier);
                const LabeledDataset fitting =
                    jitter(outs, stable_hash64(seed, "jitter_out"), opt.gen.jitter_sd);
                const GenerativeModel model = fit_model(pair.regular, fitting.instances, opt.gen,
                                                        stable_hash64(seed, "fit_out"));
                realness_detail::replace_class(train, Label::outlier, model,
                                               stable_hash64(seed, "gen_out"));
            } else {
                const LabeledDataset regs = realness_detail::class_subset(train, Label::regular);
                const LabeledDataset fitting =
                    jitter(regs, stable_hash64(seed, "jitter_reg"), opt.gen.jitter_sd);
                const GenerativeModel reg_model = fit_model(
                    pair.regular, fitting.instances, opt.gen, stable_hash64(seed, "fit_reg"));
                const GenerativeModel out_model =
                    derive_outlier_model(pair, reg_model, fitting.instances, opt.gen);
                realness_detail::replace_class(train, Label::outlier, out_model,
                                               stable_hash64(seed, "gen_out"));
            }
        }

        const Forest forest = rf_train(train, opt.ntrees, stable_hash64(seed, "rf"));
        res.kappa = realness_detail::kappa_of(forest, split.test);
        if (kind == ProblemKind::real) {
            res.kappa_drop = 0.0;
        } else if (kappa_real) {
            res.kappa_drop = *kappa_real - res.kappa;
        } else {
            const RealnessResult base =
                classify_protocol(data, ProblemKind::real, pair, variant, seed, opt);
            res.kappa_drop = base.kappa - res.kappa;
        }
        res.ok = true;
    } catch (const std::exception& e) {
        res.ok = false;
        res.note = e.what();
    }
    return res;
}

// Reference point: predictions drawn from the training-set class frequency
// instead of a classifier.
inline RealnessResult random_guess_baseline(const LabeledDataset& data, std::uint64_t seed,
                                            const RealnessOptions& opt,
                                            const double* kappa_real = nullptr) {
    RealnessResult res;
    res.problem = "Random";
    res.generator_id = "random";
    res.seed = seed;
    try {
        const SplitPair split = stratified_split(data, opt.train_fraction,
                                                 stable_hash64(seed, "split"));
        const double p_out = static_cast<double>(split.train.count(Label::outlier)) /
                             static_cast<double>(split.train.n());
        Rng rng(stable_hash64(seed, "random_guess"));
        std::vector<Label> pred(split.test.n());
        for (Label& l : pred) l = rng.uniform01() < p_out ? Label::outlier : Label::regular;
        const KappaResult k = cohens_kappa(pred, split.test.labels);
        res.kappa = k.defined ? k.kappa : 0.0;
        if (kappa_real) res.kappa_drop = *kappa_real - res.kappa;
        res.ok = true;
    } catch (const std::exception& e) {
        res.note = e.what();
    }
    return res;
}

}  // namespace synthbench
