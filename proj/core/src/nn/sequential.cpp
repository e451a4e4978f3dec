#include "uwbloc/nn/sequential.hpp"

#include <stdexcept>

#include "uwbloc/rng.hpp"

namespace uwbloc::nn {

void Sequential::add(std::unique_ptr<Layer> layer) {
  layers_.push_back(std::move(layer));
  name_params();
}

void Sequential::name_params() {
  std::vector<int> counts;
  std::vector<std::string> kinds;
  for (auto& layer : layers_) {
    std::string kind = layer->kind();
    int n = 1;
    for (size_t i = 0; i < kinds.size(); ++i)
      if (kinds[i] == kind) ++n;
    kinds.push_back(kind);
    for (Param* p : layer->params()) {
      auto dot = p->name.find('.');
      std::string leaf = dot == std::string::npos ? p->name
                                                  : p->name.substr(dot + 1);
      p->name = kind + std::to_string(n) + "." + leaf;
    }
  }
}

Tensor Sequential::forward(const Tensor& x, bool training) {
  Tensor cur = x;
  for (auto& layer : layers_) cur = layer->forward(cur, training);
  return cur;
}

Tensor Sequential::backward(const Tensor& dloss) {
  Tensor cur = dloss;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
    cur = (*it)->backward(cur);
  return cur;
}

std::vector<Param*> Sequential::params() {
  std::vector<Param*> out;
  for (auto& layer : layers_)
    for (Param* p : layer->params()) out.push_back(p);
  return out;
}

void Sequential::zero_grads() {
  for (Param* p : params()) p->grad.fill(0.0);
}

long Sequential::parameter_count() {
  long n = 0;
  for (Param* p : params()) n += p->value.numel();
  return n;
}

void Sequential::reseed_dropout(uint64_t seed) {
  uint64_t index = 0;
  for (auto& layer : layers_) {
    if (auto* d = dynamic_cast<Dropout*>(layer.get()))
      d->reseed(derive_seed(seed, 0xd09, index++));
  }
}

Sequential Sequential::clone() const {
  Sequential copy;
  for (auto& layer : layers_) copy.add(layer->clone());
  return copy;
}

Sequential build_stack(const std::vector<LayerSpec>& specs, int length,
                       int channels, uint64_t seed) {
  Sequential net;
  int len = length, ch = channels;
  bool flat = false;
  uint64_t pos = 0;
  for (const LayerSpec& spec : specs) {
    uint64_t layer_seed = derive_seed(seed, 0x5eed, pos++);
    switch (spec.kind) {
      case LayerSpec::Kind::conv1d:
        if (flat) throw std::invalid_argument("stack: conv1d after flatten");
        net.add(std::make_unique<Conv1d>(spec.kernel, ch, spec.filters,
                                         layer_seed));
        ch = spec.filters;
        break;
      case LayerSpec::Kind::instance_norm:
        if (flat)
          throw std::invalid_argument("stack: instance_norm after flatten");
        net.add(std::make_unique<InstanceNorm1d>(ch));
        break;
      case LayerSpec::Kind::relu:
        net.add(std::make_unique<Relu>());
        break;
      case LayerSpec::Kind::dropout:
        net.add(std::make_unique<Dropout>(spec.rate));
        break;
      case LayerSpec::Kind::maxpool:
        if (flat) throw std::invalid_argument("stack: maxpool after flatten");
        if (len / spec.kernel < 1)
          throw std::invalid_argument("stack: maxpool consumes whole length");
        net.add(std::make_unique<MaxPool1d>(spec.kernel));
        len /= spec.kernel;
        break;
      case LayerSpec::Kind::flatten:
        if (flat) throw std::invalid_argument("stack: flatten twice");
        net.add(std::make_unique<Flatten>());
        len = len * ch;
        ch = 1;
        flat = true;
        break;
      case LayerSpec::Kind::dense:
        if (!flat) throw std::invalid_argument("stack: dense requires flatten");
        net.add(std::make_unique<Dense>(len, spec.units, layer_seed));
        len = spec.units;
        break;
      case LayerSpec::Kind::sigmoid:
        net.add(std::make_unique<Sigmoid>());
        break;
    }
  }
  return net;
}

}  // namespace uwbloc::nn
