#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "hitcast/dataset.hpp"
#include "hitcast/errors.hpp"
#include "hitcast/net.hpp"

namespace hitcast {

struct TrainingConfig {
    std::size_t batch_size = 32;
    std::size_t max_epochs = 25;
    double learning_rate = 0.001;
    std::size_t patience = 7;
    double min_delta = 0.0;
    std::uint64_t seed = 0;
    /// 0 = validate on the split's test side; otherwise carve this fraction of
    /// train artists into a separate validation set.
    double val_fraction = 0.0;
    int threads = 1;
};

inline void validate_training_config(const TrainingConfig& cfg) {
    if (cfg.batch_size == 0) throw ConfigError("batch_size must be positive");
    if (cfg.max_epochs == 0) throw ConfigError("max_epochs must be positive");
    if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (cfg.patience == 0) throw ConfigError("patience must be positive");
    if (!(cfg.min_delta >= 0.0)) throw ConfigError("min_delta must be non-negative");
    if (!(cfg.val_fraction >= 0.0 && cfg.val_fraction < 1.0))
        throw ConfigError("val_fraction must be in [0, 1)");
    if (cfg.threads < 1) throw ConfigError("threads must be positive");
}

/// Patience rule: an epoch improves only if its loss beats the best seen by
/// strictly more than min_delta; `patience` non-improving epochs in a row stop
/// the run.
class EarlyStopper {
  public:
    struct Decision {
        bool improved = false;
        bool stop = false;
    };

    EarlyStopper(std::size_t patience, double min_delta)
        : patience_(patience), min_delta_(min_delta) {}

    Decision observe(double val_loss) {
        if (!std::isfinite(val_loss))
            throw NumericError("validation loss is not finite");
        history_.push_back(val_loss);
        Decision d;
        if (val_loss < best_ - min_delta_) {
            best_ = val_loss;
            since_ = 0;
            d.improved = true;
        } else {
            ++since_;
        }
        d.stop = since_ >= patience_;
        return d;
    }

    double best_loss() const { return best_; }
    std::size_t epochs_since_improvement() const { return since_; }
    const std::vector<double>& history() const { return history_; }

  private:
    std::size_t patience_;
    double min_delta_;
    double best_ = std::numeric_limits<double>::infinity();
    std::size_t since_ = 0;
    std::vector<double> history_;
};

struct EpochLog {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_mae = 0.0;  // popularity points, 0-100 scale
    double seconds = 0.0;
};

inline void write_epoch_log_csv(const std::filesystem::path& path,
                                const std::vector<EpochLog>& log) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "epoch,train_loss,val_loss,val_mae,seconds\n";
    for (const auto& e : log) {
        out << e.epoch << ',' << detail::fmt_g17(e.train_loss) << ','
            << detail::fmt_g17(e.val_loss) << ',' << detail::fmt_g17(e.val_mae) << ','
            << detail::fmt_g17(e.seconds) << '\n';
    }
    if (!out.flush()) throw IoError("failed writing " + path.string());
}

/// Maps a record to its net input tensor. Implementations must tolerate
/// concurrent calls on distinct records when training with threads > 1.
using InputFn = std::function<Tensor(const TrackRecord&)>;

struct ValidationResult {
    double loss = 0.0;  // mean squared error on the 0-1 popularity scale
    double mae = 0.0;   // mean absolute error in popularity points
};

inline ValidationResult validate(const PopularityNet& net,
                                 const std::vector<TrackRecord>& records,
                                 const FeatureScaler& scaler, const InputFn& input_fn) {
    if (records.empty()) throw InvalidInputError("validation set is empty");
    double loss = 0.0;
    double mae = 0.0;
    for (const auto& r : records) {
        const double pred = forward(net, input_fn(r), apply_scaler(scaler, r));
        const double target = r.popularity / 100.0;
        const double diff = pred - target;
        loss += diff * diff;
        mae += std::abs(diff) * 100.0;
    }
    const double n = static_cast<double>(records.size());
    return {loss / n, mae / n};
}

namespace detail {

inline void add_gradients(NetGradients& acc, const NetGradients& g) {
    auto add_group = [](std::vector<std::vector<double>>& a,
                        const std::vector<std::vector<double>>& b) {
        if (a.empty()) {
            a = b;
            return;
        }
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < a[i].size(); ++j) a[i][j] += b[i][j];
    };
    add_group(acc.conv_w, g.conv_w);
    add_group(acc.conv_b, g.conv_b);
    add_group(acc.meta_w, g.meta_w);
    add_group(acc.meta_b, g.meta_b);
    add_group(acc.head_w, g.head_w);
    add_group(acc.head_b, g.head_b);
}

inline TrainSample make_sample(const TrackRecord& rec, const FeatureScaler& scaler,
                               const InputFn& input_fn) {
    return {input_fn(rec), apply_scaler(scaler, rec), rec.popularity / 100.0};
}

/// One gradient step's worth of work: mean MSE over the indexed records plus
/// accumulated parameter gradients. Threaded runs chunk the batch; summation
/// order is fixed for a given thread count, so repeat runs match bitwise.
inline BatchGradients batch_gradients(const PopularityNet& net,
                                      const std::vector<TrackRecord>& records,
                                      const std::vector<std::size_t>& batch,
                                      const FeatureScaler& scaler, const InputFn& input_fn,
                                      int threads) {
    const std::size_t n = batch.size();
    const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), n);
    if (workers <= 1) {
        std::vector<TrainSample> samples;
        samples.reserve(n);
        for (std::size_t idx : batch) samples.push_back(make_sample(records[idx], scaler, input_fn));
        std::vector<const TrainSample*> views;
        views.reserve(n);
        for (const auto& s : samples) views.push_back(&s);
        return backward_batch(net, views);
    }

    std::vector<BatchGradients> parts(workers);
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                const std::size_t begin = w * chunk;
                const std::size_t end = std::min(n, begin + chunk);
                NetGradients acc;
                double loss = 0.0;
                for (std::size_t i = begin; i < end; ++i) {
                    const TrainSample s = make_sample(records[batch[i]], scaler, input_fn);
                    ForwardTrace trace = forward_traced(net, s.input, s.meta);
                    const double diff = trace.prediction - s.target;
                    loss += diff * diff;
                    backward_into(net, trace, 2.0 * diff / static_cast<double>(n), acc);
                }
                parts[w] = {loss, std::move(acc)};
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);

    BatchGradients total;
    total.loss = 0.0;
    for (auto& part : parts) {
        total.loss += part.loss;
        add_gradients(total.grads, part.grads);
    }
    total.loss /= static_cast<double>(n);
    return total;
}

}  // namespace detail

struct TrainResult {
    PopularityNet net;  // parameters from the best validation epoch
    std::vector<EpochLog> log;
    std::size_t best_epoch = 0;  // 1-based
    double best_val_loss = std::numeric_limits<double>::infinity();
    bool stopped_early = false;
    std::size_t epochs_run = 0;
};

using ImproveCallback = std::function<void(const PopularityNet&, std::size_t epoch)>;

/// Full training loop: seeded batch shuffling, Adam updates, a validation pass
/// per epoch, and patience-based stopping. Returns the parameters of the best
/// validation epoch, not the last one; on_improve fires whenever that best is
/// updated (e.g. to persist a checkpoint).
inline TrainResult train(const PopularityNet& initial, const DatasetSplit& split,
                         const FeatureScaler& scaler, const InputFn& input_fn,
                         const TrainingConfig& cfg, const ImproveCallback& on_improve = {}) {
    validate_training_config(cfg);
    if (split.train.empty()) throw ConfigError("training set is empty");

    std::vector<TrackRecord> train_records = split.train;
    std::vector<TrackRecord> val_records;
    if (cfg.val_fraction > 0.0) {
        const DatasetSplit carved =
            split_by_artist(split.train, 1.0 - cfg.val_fraction, cfg.seed);
        train_records = carved.train;
        val_records = carved.test;
    } else {
        val_records = split.test;
    }
    if (val_records.empty()) throw ConfigError("validation set is empty");

    TrainResult result;
    PopularityNet net = initial;
    AdamState opt;
    EarlyStopper stopper(cfg.patience, cfg.min_delta);

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto batches =
            batch_indices(train_records.size(), cfg.batch_size, cfg.seed, epoch - 1, true);
        double loss_sum = 0.0;
        for (const auto& batch : batches) {
            BatchGradients bg = detail::batch_gradients(net, train_records, batch, scaler,
                                                        input_fn, cfg.threads);
            optimizer_step(net, bg.grads, opt, cfg.learning_rate);
            loss_sum += bg.loss * static_cast<double>(batch.size());
        }
        const double train_loss = loss_sum / static_cast<double>(train_records.size());
        const ValidationResult vr = validate(net, val_records, scaler, input_fn);
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.log.push_back({epoch, train_loss, vr.loss, vr.mae, seconds});

        const EarlyStopper::Decision d = stopper.observe(vr.loss);
        if (d.improved) {
            result.net = net;
            result.best_epoch = epoch;
            result.best_val_loss = vr.loss;
            if (on_improve) on_improve(net, epoch);
        }
        if (d.stop) {
            result.stopped_early = true;
            break;
        }
    }
    result.epochs_run = result.log.size();
    if (result.best_epoch == 0) result.net = net;  // nothing ever improved on +inf: unreachable
    return result;
}

}  // namespace hitcast
