"""Multilayer perceptron classifier trained with Adam on mini-batches."""
import numpy as np

from mcd_density.discriminators.base import BaseDiscriminator, MlpParams, cross_entropy, register_discriminator

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8


@register_discriminator
class MlpDiscriminator(BaseDiscriminator):
    """ReLU hidden layers, sigmoid output, binary cross-entropy loss.

    Parameters are stored as [W1, b1, W2, b2, ..., W_out, b_out]. Hidden weights use He
    initialization and the output layer starts at zero, so an untrained model predicts 0.5.
    With ``dropout`` > 0, inverted dropout is applied to hidden activations during training only.
    """

    kind = "mlp"
    label = "MLP"

    @classmethod
    def default_hyperparameters(cls):
        return MlpParams()

    @classmethod
    def hyperparameters_of(cls, spec):
        return spec.mlp

    def initial_parameters(self, input_width, rng):
        parameters = []
        fan_in = input_width
        for width in self.hyperparameters.hidden_layers:
            parameters.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, width)))
            parameters.append(np.zeros(width))
            fan_in = width
        parameters.extend([np.zeros((fan_in, 1)), np.zeros(1)])
        return parameters

    def _forward(self, parameters, inputs, rng=None):
        """Return the logits and the cached activations and dropout masks of every hidden layer."""
        activations, masks = [inputs], []
        keep = 1.0 - self.hyperparameters.dropout
        hidden = inputs
        for index in range(0, len(parameters) - 2, 2):
            hidden = np.maximum(hidden @ parameters[index] + parameters[index + 1], 0.0)
            if rng is not None and keep < 1.0:
                mask = (rng.random(hidden.shape) < keep) / keep
                hidden = hidden * mask
            else:
                mask = None
            masks.append(mask)
            activations.append(hidden)
        logits = (hidden @ parameters[-2] + parameters[-1]).ravel()
        return logits, activations, masks

    def logits(self, parameters, inputs):
        return self._forward(parameters, inputs)[0]

    def loss_and_gradient(self, parameters, inputs, labels, rng=None):
        logits, activations, masks = self._forward(parameters, inputs, rng)
        loss, dlogits = cross_entropy(logits, labels)
        gradient = [None] * len(parameters)
        upstream = dlogits.reshape(-1, 1)
        for index in range(len(parameters) - 2, -1, -2):
            layer_input = activations[index // 2]
            gradient[index] = layer_input.T @ upstream
            gradient[index + 1] = upstream.sum(axis=0)
            if index == 0:
                break
            upstream = upstream @ parameters[index].T
            mask = masks[index // 2 - 1]
            if mask is not None:
                upstream = upstream * mask
            upstream = upstream * (layer_input > 0)
        return loss, gradient

    def optimize(self, inputs, labels, rng):
        parameters = [array.copy() for array in self.parameters]
        first = [np.zeros_like(array) for array in parameters]
        second = [np.zeros_like(array) for array in parameters]
        size, batch = len(labels), self.hyperparameters.batch_size
        rate = self.hyperparameters.learning_rate
        step = 0
        for _ in range(self.hyperparameters.epochs):
            order = rng.permutation(size)
            for start in range(0, size, batch):
                rows = order[start : start + batch]
                _, gradient = self.loss_and_gradient(parameters, inputs[rows], labels[rows], rng)
                step += 1
                for index, grad in enumerate(gradient):
                    first[index] = ADAM_BETA1 * first[index] + (1.0 - ADAM_BETA1) * grad
                    second[index] = ADAM_BETA2 * second[index] + (1.0 - ADAM_BETA2) * grad * grad
                    corrected_first = first[index] / (1.0 - ADAM_BETA1**step)
                    corrected_second = second[index] / (1.0 - ADAM_BETA2**step)
                    parameters[index] = parameters[index] - rate * corrected_first / (
                        np.sqrt(corrected_second) + ADAM_EPSILON
                    )
        return parameters


@register_discriminator
class MlpNoDropout(MlpDiscriminator):
    """The same perceptron trained without dropout."""

    kind = "mlp_nodropout"
    label = "MLP:no-D.O."

    @classmethod
    def default_hyperparameters(cls):
        return MlpParams(dropout=0.0)

    @classmethod
    def hyperparameters_of(cls, spec):
        return spec.mlp.model_copy(update={"dropout": 0.0})
