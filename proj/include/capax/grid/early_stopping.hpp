#pragma once

#include <limits>

#include "capax/grid/protocol.hpp"

namespace capax::grid {

/// Stopping rule owned by the harness: stop at max_epochs, or once
/// `patience` consecutive epochs fail to strictly beat the best val_loss.
class EarlyStopping {
 public:
  explicit EarlyStopping(int max_epochs = 50, int patience = 5);

  /// Records the next epoch's validation loss and returns the reply.
  protocol::Control observe(double val_loss);

  int epochs_seen() const { return epochs_; }
  int best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }
  bool stopped() const { return stopped_; }
  /// True when the patience window, not the epoch cap, ended the run.
  bool stopped_early() const { return stopped_ && stale_ >= patience_ && epochs_ < max_epochs_; }

 private:
  int max_epochs_;
  int patience_;
  int epochs_ = 0;
  int best_epoch_ = 0;
  int stale_ = 0;
  double best_loss_ = std::numeric_limits<double>::infinity();
  bool stopped_ = false;
};

}  // namespace capax::grid
