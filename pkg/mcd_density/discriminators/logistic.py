"""Logistic regression with an elastic-net penalty."""
import numpy as np

from mcd_density.discriminators.base import (
    BaseDiscriminator,
    ElasticNetParams,
    cross_entropy,
    register_discriminator,
)


def soft_threshold(values, threshold):
    """Proximal operator of threshold * |.|."""
    return np.sign(values) * np.maximum(np.abs(values) - threshold, 0.0)


@register_discriminator
class ElasticNetLogistic(BaseDiscriminator):
    """Logistic regression minimizing mean cross-entropy + l1 |w| + l2 / 2 |w|^2, bias unpenalized.

    Trained by full-batch proximal gradient descent with a backtracking line search; the L1 term is
    handled by soft-thresholding so the stopping rule applies to the gradient mapping.
    """

    kind = "logistic_elasticnet"
    label = "E.Net"

    @classmethod
    def default_hyperparameters(cls):
        return ElasticNetParams()

    @classmethod
    def hyperparameters_of(cls, spec):
        return spec.elasticnet

    @classmethod
    def from_weights(cls, weights, bias, hyperparameters=None):
        """Build a fitted model from explicit weights on unstandardized inputs."""
        weights = np.asarray(weights, dtype=float).ravel()
        model = cls(hyperparameters).prepare(len(weights))
        model.parameters = [weights, np.array([float(bias)])]
        return model

    def initial_parameters(self, input_width, rng):
        return [np.zeros(input_width), np.zeros(1)]

    def logits(self, parameters, inputs):
        weights, bias = parameters
        return inputs @ weights + bias[0]

    def _smooth(self, parameters, inputs, labels):
        weights, _ = parameters
        loss, dlogits = cross_entropy(self.logits(parameters, inputs), labels)
        loss += 0.5 * self.hyperparameters.l2 * float(weights @ weights)
        gradient = [inputs.T @ dlogits + self.hyperparameters.l2 * weights, np.array([dlogits.sum()])]
        return loss, gradient

    def loss_and_gradient(self, parameters, inputs, labels, rng=None):
        loss, gradient = self._smooth(parameters, inputs, labels)
        weights = parameters[0]
        loss += self.hyperparameters.l1 * float(np.abs(weights).sum())
        gradient[0] = gradient[0] + self.hyperparameters.l1 * np.sign(weights)
        return loss, gradient

    def optimize(self, inputs, labels, rng):
        weights, bias = (array.copy() for array in self.parameters)
        l1 = self.hyperparameters.l1
        step = 1.0
        for _ in range(self.hyperparameters.max_iter):
            loss, (grad_w, grad_b) = self._smooth([weights, bias], inputs, labels)
            while True:
                new_w = soft_threshold(weights - step * grad_w, step * l1)
                new_b = bias - step * grad_b
                delta = np.concatenate([new_w - weights, new_b - bias])
                new_loss, _ = self._smooth([new_w, new_b], inputs, labels)
                bound = loss + float(np.concatenate([grad_w, grad_b]) @ delta) + float(delta @ delta) / (2.0 * step)
                if new_loss <= bound + 1e-15 or step < 1e-12:
                    break
                step *= 0.5
            weights, bias = new_w, new_b
            if np.linalg.norm(delta) / step < self.hyperparameters.tolerance:
                break
            step = min(step * 2.0, 1e3)
        return [weights, bias]
