//! Fixed-architecture neural stack with hand-written backward passes.
//!
//! Three architectures share an embedding layer and a dense readout:
//!
//! - `Lstm`: embedding → LSTM → final hidden state → dropout → dense
//! - `BiLstm`: embedding → forward + backward LSTM → concatenated final
//!   states → dropout → dense
//! - `Cnn`: embedding → 1-D convolution + ReLU + max-over-time pooling →
//!   dropout → dense
//!
//! Binary tasks use a single-logit head with binary cross-entropy; three-way
//! tasks use a softmax head with cross-entropy. Mean squared error is
//! available as a loss primitive but no pipeline uses it.
//!
//! There is no general autodiff: each layer pairs its forward pass with an
//! explicit backward pass, and the whole composition is validated against
//! central finite differences at 64-bit precision in the test suites.
//! Training runs at 32-bit.

pub mod layers;
pub mod losses;
pub mod optim;
pub mod tensor;
pub mod train;

pub use layers::{
    bilstm_backward, bilstm_forward, conv_pool_backward, conv_pool_forward, dropout_apply,
    dropout_with_seed, lstm_backward, lstm_forward, ConvParams, DenseParams, DropoutMode,
    EmbeddingParams, LstmParams,
};
pub use losses::{loss_bce_logits, loss_cross_entropy, loss_mse};
pub use optim::{adam_step, sgd_step, AdamConfig, AdamMoments};
pub use tensor::{Scalar, Tensor2};
pub use train::{
    head_probabilities, init_params, neural_predict, predict_from_probabilities, train_model,
    Arch, EncoderParams, NetDims, NetParams, NeuralModel, OptimizerKind, TrainConfig, TrainHistory,
};
