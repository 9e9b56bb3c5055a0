#include "hitcast/training.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "hitcast/errors.hpp"

namespace hitcast {
namespace {

TrackRecord varied_record(int i, const std::string& artist) {
    TrackRecord r;
    r.track_id = artist + "_t" + std::to_string(i);
    r.artist_id = artist;
    r.duration_ms = 150000 + 3000.0 * i;
    r.acousticness = 0.05 + 0.07 * i;
    r.danceability = 0.1 + 0.08 * i;
    r.energy = 0.9 - 0.06 * i;
    r.instrumentalness = 0.01 + 0.02 * i;
    r.liveness = 0.02 + 0.03 * i;
    r.loudness = -12.0 + 0.5 * i;
    r.speechiness = 0.01 + 0.025 * i;
    r.tempo = 90.0 + 7.0 * i;
    r.time_signature = 3.0 + (i % 3);
    r.valence = 0.95 - 0.07 * i;
    r.artist_popularity = 35.0 + 4.0 * i;
    r.artist_followers = 1000.0 + 5000.0 * i;
    r.release_year = 1995 + i;
    r.release_month = 1 + (i % 12);
    r.popularity = 20.0 + 60.0 * r.danceability;
    return r;
}

NetConfig toy_config() {
    NetConfig cfg;
    cfg.conv_filters = {2, 2, 2, 2};
    cfg.meta_dim = 14;
    cfg.meta_hidden = {8};
    cfg.head_hidden = {8};
    cfg.input_mels = 16;
    cfg.input_frames = 16;
    return cfg;
}

InputFn zero_input(const NetConfig& cfg) {
    const Tensor t({1, cfg.input_mels, cfg.input_frames});
    return [t](const TrackRecord&) { return t; };
}

FeatureScaler identity_scaler() {
    FeatureScaler s;
    s.names = model_feature_names();
    s.mean.assign(s.names.size(), 0.0);
    s.stddev.assign(s.names.size(), 1.0);
    s.with_artist_features = true;
    return s;
}

/// Two artists of four tracks each for training, one more pair held out.
DatasetSplit linear_split() {
    DatasetSplit split;
    for (int i = 0; i < 4; ++i) split.train.push_back(varied_record(i, "art_a"));
    for (int i = 4; i < 8; ++i) split.train.push_back(varied_record(i, "art_b"));
    for (int i = 8; i < 10; ++i) split.test.push_back(varied_record(i, "art_c"));
    return split;
}

bool same_parameters(PopularityNet a, PopularityNet b) {
    const auto va = parameter_views(a);
    const auto vb = parameter_views(b);
    if (va.size() != vb.size()) return false;
    for (std::size_t i = 0; i < va.size(); ++i)
        if (*va[i].second != *vb[i].second) return false;
    return true;
}

TEST(EarlyStopping, StrictlyDecreasingLossNeverStops) {
    EarlyStopper stopper(7, 0.0);
    for (int e = 0; e < 25; ++e) {
        const auto d = stopper.observe(1.0 - 0.01 * e);
        EXPECT_TRUE(d.improved);
        EXPECT_FALSE(d.stop);
    }
    EXPECT_EQ(stopper.epochs_since_improvement(), 0u);
}

TEST(EarlyStopping, FlatPlateauStopsAfterPatienceRunsOut) {
    EarlyStopper stopper(7, 0.0);
    EXPECT_FALSE(stopper.observe(1.0).stop);
    std::size_t stop_epoch = 1;
    for (int e = 2; e <= 20; ++e) {
        if (stopper.observe(1.1).stop) {
            stop_epoch = static_cast<std::size_t>(e);
            break;
        }
    }
    EXPECT_EQ(stop_epoch, 8u);
    EXPECT_EQ(stopper.history().size(), 8u);
    EXPECT_DOUBLE_EQ(stopper.best_loss(), 1.0);
}

TEST(EarlyStopping, ImprovementMidwayResetsTheCounter) {
    EarlyStopper stopper(7, 0.0);
    const std::vector<double> prefix = {1.0, 1.1, 1.1, 0.9};
    for (double v : prefix) EXPECT_FALSE(stopper.observe(v).stop);
    EXPECT_EQ(stopper.epochs_since_improvement(), 0u);
    std::size_t stop_epoch = 0;
    for (int e = 5; e <= 30; ++e) {
        if (stopper.observe(1.0).stop) {
            stop_epoch = static_cast<std::size_t>(e);
            break;
        }
    }
    EXPECT_EQ(stop_epoch, 11u);
    EXPECT_DOUBLE_EQ(stopper.best_loss(), 0.9);
}

TEST(EarlyStopping, EqualLossIsNotAnImprovement) {
    EarlyStopper stopper(3, 0.0);
    EXPECT_TRUE(stopper.observe(1.0).improved);
    EXPECT_FALSE(stopper.observe(1.0).improved);
    EXPECT_EQ(stopper.epochs_since_improvement(), 1u);
}

TEST(EarlyStopping, MinDeltaDemandsARealMargin) {
    EarlyStopper stopper(3, 0.05);
    EXPECT_TRUE(stopper.observe(1.0).improved);
    EXPECT_FALSE(stopper.observe(0.97).improved);  // within the margin
    EXPECT_TRUE(stopper.observe(0.94).improved);
    EXPECT_DOUBLE_EQ(stopper.best_loss(), 0.94);
}

TEST(EarlyStopping, NonFiniteLossRaisesNumericError) {
    EarlyStopper stopper(3, 0.0);
    EXPECT_THROW(stopper.observe(std::numeric_limits<double>::quiet_NaN()), NumericError);
    EXPECT_THROW(stopper.observe(std::numeric_limits<double>::infinity()), NumericError);
}

TEST(TrainingConfigValidation, RejectsDegenerateValues) {
    TrainingConfig base;
    EXPECT_NO_THROW(validate_training_config(base));

    TrainingConfig cfg = base;
    cfg.max_epochs = 0;
    EXPECT_THROW(validate_training_config(cfg), ConfigError);
    cfg = base;
    cfg.batch_size = 0;
    EXPECT_THROW(validate_training_config(cfg), ConfigError);
    cfg = base;
    cfg.learning_rate = 0.0;
    EXPECT_THROW(validate_training_config(cfg), ConfigError);
    cfg = base;
    cfg.patience = 0;
    EXPECT_THROW(validate_training_config(cfg), ConfigError);
    cfg = base;
    cfg.min_delta = -0.1;
    EXPECT_THROW(validate_training_config(cfg), ConfigError);
    cfg = base;
    cfg.val_fraction = 1.0;
    EXPECT_THROW(validate_training_config(cfg), ConfigError);
    cfg = base;
    cfg.threads = 0;
    EXPECT_THROW(validate_training_config(cfg), ConfigError);
}

TEST(Validation, CraftedNetReportsExactMae) {
    NetConfig cfg = toy_config();
    cfg.meta_hidden = {};
    cfg.head_hidden = {};
    PopularityNet net = build_net(cfg);
    // Flatten is 2 wide, so fused slot 10 is the tempo feature; route it
    // straight to the output.
    net.head[0].w[flatten_width(cfg) + 8] = 1.0;

    TrackRecord a = varied_record(0, "x");
    a.tempo = 0.1;
    a.popularity = 12.0;
    TrackRecord b = varied_record(1, "x");
    b.tempo = 0.2;
    b.popularity = 16.0;
    for (TrackRecord* r : {&a, &b}) {
        r->duration_ms = 0;
        r->acousticness = 0;
        r->danceability = 0;
        r->energy = 0;
        r->instrumentalness = 0;
        r->liveness = 0;
        r->loudness = 0;
        r->speechiness = 0;
        r->time_signature = 0;
        r->valence = 0;
        r->artist_popularity = 0;
        r->artist_followers = 0;
        r->release_year = 0;
    }

    const auto vr = validate(net, {a, b}, identity_scaler(), zero_input(cfg));
    // Predictions land at 10 and 20 popularity points against 12 and 16.
    EXPECT_NEAR(vr.mae, 3.0, 1e-12);
    EXPECT_NEAR(vr.loss, 0.001, 1e-15);
}

TEST(Validation, PerfectPredictionsScoreZero) {
    NetConfig cfg = toy_config();
    cfg.meta_hidden = {};
    cfg.head_hidden = {};
    PopularityNet net = build_net(cfg);
    net.head[0].w[flatten_width(cfg) + 8] = 1.0;

    TrackRecord r;
    r.track_id = "p";
    r.artist_id = "x";
    r.tempo = 0.1;
    r.popularity = 10.0;
    r.time_signature = 0.0;

    const auto vr = validate(net, {r}, identity_scaler(), zero_input(cfg));
    EXPECT_EQ(vr.loss, 0.0);
    EXPECT_EQ(vr.mae, 0.0);
}

TEST(Validation, RepeatCallsAreBitwiseIdentical) {
    const NetConfig cfg = toy_config();
    const PopularityNet net = init_parameters(cfg, 99);
    const DatasetSplit split = linear_split();
    const FeatureScaler scaler = fit_scaler(split.train);
    const auto fn = zero_input(cfg);
    const auto a = validate(net, split.train, scaler, fn);
    const auto b = validate(net, split.train, scaler, fn);
    EXPECT_EQ(a.loss, b.loss);
    EXPECT_EQ(a.mae, b.mae);
}

TEST(Validation, EmptyRecordListThrows) {
    const NetConfig cfg = toy_config();
    const PopularityNet net = build_net(cfg);
    EXPECT_THROW(validate(net, {}, identity_scaler(), zero_input(cfg)), InvalidInputError);
}

TEST(Train, OverfitsASmallLinearDataset) {
    const NetConfig net_cfg = toy_config();
    const DatasetSplit split = linear_split();
    const FeatureScaler scaler = fit_scaler(split.train);

    TrainingConfig cfg;
    cfg.batch_size = 8;
    cfg.max_epochs = 500;
    cfg.patience = 500;
    cfg.learning_rate = 0.001;
    cfg.seed = 7;

    const PopularityNet net = init_parameters(net_cfg, 42);
    const TrainResult result = train(net, split, scaler, zero_input(net_cfg), cfg);
    ASSERT_FALSE(result.log.empty());
    EXPECT_LT(result.log.back().train_loss, 1e-2);
    EXPECT_EQ(result.epochs_run, result.log.size());
    for (std::size_t i = 0; i < result.log.size(); ++i)
        EXPECT_EQ(result.log[i].epoch, i + 1);
}

TEST(Train, ReturnsTheBestEpochsParameters) {
    const NetConfig net_cfg = toy_config();
    const DatasetSplit split = linear_split();
    const FeatureScaler scaler = fit_scaler(split.train);
    const auto fn = zero_input(net_cfg);

    TrainingConfig cfg;
    cfg.batch_size = 4;
    cfg.max_epochs = 40;
    cfg.patience = 40;
    cfg.seed = 11;

    const TrainResult result = train(init_parameters(net_cfg, 42), split, scaler, fn, cfg);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : result.log) best = std::min(best, e.val_loss);
    EXPECT_EQ(result.best_val_loss, best);
    ASSERT_GE(result.best_epoch, 1u);
    EXPECT_EQ(result.log[result.best_epoch - 1].val_loss, best);

    const auto replay = validate(result.net, split.test, scaler, fn);
    EXPECT_EQ(replay.loss, result.best_val_loss);
}

TEST(Train, SameSeedReproducesTheRunBitwise) {
    const NetConfig net_cfg = toy_config();
    const DatasetSplit split = linear_split();
    const FeatureScaler scaler = fit_scaler(split.train);
    const auto fn = zero_input(net_cfg);

    TrainingConfig cfg;
    cfg.batch_size = 4;
    cfg.max_epochs = 30;
    cfg.patience = 30;
    cfg.seed = 5;

    const TrainResult a = train(init_parameters(net_cfg, 42), split, scaler, fn, cfg);
    const TrainResult b = train(init_parameters(net_cfg, 42), split, scaler, fn, cfg);
    ASSERT_EQ(a.log.size(), b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) {
        EXPECT_EQ(a.log[i].train_loss, b.log[i].train_loss) << "epoch " << i + 1;
        EXPECT_EQ(a.log[i].val_loss, b.log[i].val_loss) << "epoch " << i + 1;
        EXPECT_EQ(a.log[i].val_mae, b.log[i].val_mae) << "epoch " << i + 1;
    }
    EXPECT_TRUE(same_parameters(a.net, b.net));
    EXPECT_EQ(a.best_epoch, b.best_epoch);
}

TEST(Train, DifferentSeedsShuffleDifferently) {
    const NetConfig net_cfg = toy_config();
    const DatasetSplit split = linear_split();
    const FeatureScaler scaler = fit_scaler(split.train);
    const auto fn = zero_input(net_cfg);

    TrainingConfig cfg;
    cfg.batch_size = 4;
    cfg.max_epochs = 5;
    cfg.patience = 30;
    cfg.seed = 1;
    const TrainResult a = train(init_parameters(net_cfg, 42), split, scaler, fn, cfg);
    cfg.seed = 2;
    const TrainResult b = train(init_parameters(net_cfg, 42), split, scaler, fn, cfg);
    EXPECT_NE(a.log.back().train_loss, b.log.back().train_loss);
}

TEST(Train, HugeMinDeltaStopsRightAfterPatience) {
    const NetConfig net_cfg = toy_config();
    const DatasetSplit split = linear_split();
    const FeatureScaler scaler = fit_scaler(split.train);

    TrainingConfig cfg;
    cfg.batch_size = 8;
    cfg.max_epochs = 50;
    cfg.patience = 3;
    cfg.min_delta = 10.0;  // no realistic epoch can clear this bar twice
    cfg.seed = 3;

    const TrainResult result =
        train(init_parameters(net_cfg, 42), split, scaler, zero_input(net_cfg), cfg);
    EXPECT_TRUE(result.stopped_early);
    EXPECT_EQ(result.epochs_run, 4u);
    EXPECT_EQ(result.best_epoch, 1u);
}

TEST(Train, ImprovementCallbackTracksBestEpochs) {
    const NetConfig net_cfg = toy_config();
    const DatasetSplit split = linear_split();
    const FeatureScaler scaler = fit_scaler(split.train);

    TrainingConfig cfg;
    cfg.batch_size = 4;
    cfg.max_epochs = 20;
    cfg.patience = 20;
    cfg.seed = 13;

    std::vector<std::size_t> improved_at;
    const TrainResult result =
        train(init_parameters(net_cfg, 42), split, scaler, zero_input(net_cfg), cfg,
              [&](const PopularityNet&, std::size_t epoch) { improved_at.push_back(epoch); });
    ASSERT_FALSE(improved_at.empty());
    EXPECT_EQ(improved_at.front(), 1u);
    for (std::size_t i = 1; i < improved_at.size(); ++i)
        EXPECT_LT(improved_at[i - 1], improved_at[i]);
    EXPECT_EQ(improved_at.back(), result.best_epoch);
}

TEST(Train, ValFractionCarvesValidationOutOfTrain) {
    const NetConfig net_cfg = toy_config();
    DatasetSplit split;
    for (int a = 0; a < 4; ++a)
        for (int i = 0; i < 3; ++i)
            split.train.push_back(varied_record(a * 3 + i, "artist" + std::to_string(a)));
    const FeatureScaler scaler = fit_scaler(split.train);

    TrainingConfig cfg;
    cfg.batch_size = 4;
    cfg.max_epochs = 3;
    cfg.patience = 10;
    cfg.seed = 21;
    cfg.val_fraction = 0.25;

    const TrainResult result =
        train(init_parameters(net_cfg, 42), split, scaler, zero_input(net_cfg), cfg);
    EXPECT_EQ(result.epochs_run, 3u);
    for (const auto& e : result.log) EXPECT_TRUE(std::isfinite(e.val_loss));
}

TEST(Train, EmptySidesAreRejected) {
    const NetConfig net_cfg = toy_config();
    const FeatureScaler scaler = identity_scaler();
    const PopularityNet net = build_net(net_cfg);
    TrainingConfig cfg;

    DatasetSplit no_train;
    no_train.test.push_back(varied_record(0, "a"));
    EXPECT_THROW(train(net, no_train, scaler, zero_input(net_cfg), cfg), ConfigError);

    DatasetSplit no_val;
    no_val.train.push_back(varied_record(0, "a"));
    EXPECT_THROW(train(net, no_val, scaler, zero_input(net_cfg), cfg), ConfigError);
}

TEST(Train, ZeroMaxEpochsIsRejected) {
    const NetConfig net_cfg = toy_config();
    TrainingConfig cfg;
    cfg.max_epochs = 0;
    EXPECT_THROW(train(build_net(net_cfg), linear_split(), identity_scaler(),
                       zero_input(net_cfg), cfg),
                 ConfigError);
}

TEST(Train, ThreadedBatchesAreReproducible) {
    const NetConfig net_cfg = toy_config();
    const DatasetSplit split = linear_split();
    const FeatureScaler scaler = fit_scaler(split.train);
    const auto fn = zero_input(net_cfg);

    TrainingConfig cfg;
    cfg.batch_size = 8;
    cfg.max_epochs = 6;
    cfg.patience = 10;
    cfg.seed = 17;
    cfg.threads = 2;

    const TrainResult a = train(init_parameters(net_cfg, 42), split, scaler, fn, cfg);
    const TrainResult b = train(init_parameters(net_cfg, 42), split, scaler, fn, cfg);
    ASSERT_EQ(a.log.size(), b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) {
        EXPECT_EQ(a.log[i].train_loss, b.log[i].train_loss);
        EXPECT_EQ(a.log[i].val_loss, b.log[i].val_loss);
    }
    EXPECT_TRUE(same_parameters(a.net, b.net));
    for (const auto& e : a.log) EXPECT_TRUE(std::isfinite(e.train_loss));
}

TEST(EpochLogCsv, WritesHeaderAndOneRowPerEpoch) {
    const std::filesystem::path path =
        std::filesystem::path(::testing::TempDir()) / "epoch_log.csv";
    const std::vector<EpochLog> log = {
        {1, 0.5, 0.625, 12.5, 1.25},
        {2, 0.25, 0.3, 8.75, 1.5},
    };
    write_epoch_log_csv(path, log);

    std::ifstream in(path);
    std::string line;
    ASSERT_TRUE(std::getline(in, line));
    EXPECT_EQ(line, "epoch,train_loss,val_loss,val_mae,seconds");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty()) ++rows;
    }
    EXPECT_EQ(rows, 2u);

    std::ifstream again(path);
    std::stringstream buf;
    buf << again.rdbuf();
    EXPECT_NE(buf.str().find("\n1,0.5,0.625,12.5,1.25\n"), std::string::npos);
}

}  // namespace
}  // namespace hitcast
