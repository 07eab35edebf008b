#include "capax/grid/early_stopping.hpp"

#include "capax/util/error.hpp"

namespace capax::grid {

EarlyStopping::EarlyStopping(int max_epochs, int patience) : max_epochs_(max_epochs), patience_(patience) {
  if (max_epochs < 1 || patience < 1)
    throw Error(ErrorCode::InvalidArgument, "max_epochs and patience must be positive");
}

protocol::Control EarlyStopping::observe(double val_loss) {
  if (stopped_) throw Error(ErrorCode::ProtocolViolation, "epoch reported after stop");
  ++epochs_;
  // ties are not improvements
  if (val_loss < best_loss_) {
    best_loss_ = val_loss;
    best_epoch_ = epochs_;
    stale_ = 0;
  } else {
    ++stale_;
  }
  stopped_ = epochs_ >= max_epochs_ || stale_ >= patience_;
  return stopped_ ? protocol::Control::Stop : protocol::Control::Continue;
}

}  // namespace capax::grid
