// Feeds a hand-written validation-loss curve through the early stopping rule
// and prints the decision it makes after each epoch.

#include <cstdio>
#include <vector>

#include "hitcast/training.hpp"

int main() {
    using namespace hitcast;

    const std::vector<double> val_loss = {0.90, 0.72, 0.61, 0.58, 0.59, 0.585,
                                          0.579, 0.60, 0.61, 0.62, 0.63, 0.64};
    EarlyStopper stopper(4, 0.0);

    std::printf("patience 4, min_delta 0\n");
    std::printf("epoch  val_loss  best     stale  decision\n");
    for (std::size_t e = 0; e < val_loss.size(); ++e) {
        const auto d = stopper.observe(val_loss[e]);
        std::printf("%5zu  %.3f     %.3f    %zu      %s\n", e + 1, val_loss[e],
                    stopper.best_loss(), stopper.epochs_since_improvement(),
                    d.stop ? "stop" : (d.improved ? "improved, snapshot" : "wait"));
        if (d.stop) break;
    }
    return 0;
}
