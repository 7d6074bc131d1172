#include "aclab/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "aclab/error.hpp"
#include "aclab/rng.hpp"

namespace aclab {

void SamplerSpec::validate() const {
    if (kind == SamplerKind::BernoulliDrop && !(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("sampler: drop probability " +
                                    std::to_string(p) + " outside [0,1]");
    }
    if (kind == SamplerKind::GaussianNoise &&
        (!(sigma >= 0.0) || !std::isfinite(sigma))) {
        throw std::invalid_argument("sampler: sigma must be nonnegative");
    }
}

std::string SamplerSpec::label() const {
    std::ostringstream out;
    switch (kind) {
        case SamplerKind::BernoulliDrop:
            out << "bernoulli(p=" << p << ")";
            break;
        case SamplerKind::GaussianNoise:
            out << "gaussian(sigma=" << sigma << (clampToRange ? "" : ",unclamped")
                << ")";
            break;
        case SamplerKind::LinearScale:
            out << "linear";
            break;
        case SamplerKind::Identity:
            out << "identity";
            break;
    }
    return out.str();
}

Tensor SampleStream::draw(size_t index) const {
    spec.validate();
    if (index >= count) {
        throw std::invalid_argument("sampler: index " + std::to_string(index) +
                                    " out of range for stream of " +
                                    std::to_string(count));
    }
    const Tensor& x = baseInput;
    switch (spec.kind) {
        case SamplerKind::Identity:
            return x;
        case SamplerKind::LinearScale: {
            const double alpha = static_cast<double>(index + 1) /
                                 static_cast<double>(count);
            Tensor out(x.shape());
            for (size_t k = 0; k < x.size(); ++k) out[k] = alpha * x[k];
            return out;
        }
        case SamplerKind::GaussianNoise: {
            Tensor out(x.shape());
            for (size_t k = 0; k < x.size(); ++k) {
                const double noise =
                    spec.sigma *
                    rng::normal(seed, rng::streams::kSampler, index, k);
                double v = x[k] + noise;
                if (spec.clampToRange) v = std::clamp(v, 0.0, 1.0);
                out[k] = v;
            }
            return out;
        }
        case SamplerKind::BernoulliDrop: {
            // One Bernoulli trial per spatial site; all channels of a
            // dropped site go to 0 together.
            Tensor out(x.shape());
            size_t channels = 1, sites = x.size();
            if (x.rank() == 3) {
                channels = x.shape()[0];
                sites = x.shape()[1] * x.shape()[2];
            }
            for (size_t s = 0; s < sites; ++s) {
                const bool drop =
                    rng::uniform01(seed, rng::streams::kSampler, index, s) <
                    spec.p;
                for (size_t c = 0; c < channels; ++c) {
                    out[c * sites + s] = drop ? 0.0 : x[c * sites + s];
                }
            }
            return out;
        }
    }
    throw std::logic_error("sampler: unknown kind");
}

SamplerSpec parseSamplerSpec(const std::string& token) {
    std::vector<std::string> parts;
    std::istringstream in(token);
    std::string item;
    while (std::getline(in, item, ':')) parts.push_back(item);
    if (parts.empty()) throw ConfigError("sampler: empty spec");
    SamplerSpec spec;
    try {
        if (parts[0] == "bernoulli") {
            spec.kind = SamplerKind::BernoulliDrop;
            if (parts.size() != 2) {
                throw ConfigError(
                    "sampler: bernoulli needs a drop probability, e.g. "
                    "bernoulli:0.7");
            }
            spec.p = std::stod(parts[1]);
        } else if (parts[0] == "gaussian") {
            spec.kind = SamplerKind::GaussianNoise;
            if (parts.size() != 2 && parts.size() != 3) {
                throw ConfigError(
                    "sampler: gaussian needs a noise level, e.g. gaussian:0.15");
            }
            spec.sigma = std::stod(parts[1]);
            if (parts.size() == 3) {
                if (parts[2] != "unclamped") {
                    throw ConfigError("sampler: unknown gaussian option '" +
                                      parts[2] + "'");
                }
                spec.clampToRange = false;
            }
        } else if (parts[0] == "linear" && parts.size() == 1) {
            spec.kind = SamplerKind::LinearScale;
        } else if (parts[0] == "identity" && parts.size() == 1) {
            spec.kind = SamplerKind::Identity;
        } else {
            throw ConfigError("sampler: unknown kind '" + parts[0] + "'");
        }
    } catch (const std::invalid_argument&) {
        throw ConfigError("sampler: bad numeric parameter in '" + token + "'");
    }
    spec.validate();
    return spec;
}

double keptFraction(const Tensor& sample, const Tensor& base) {
    if (!sample.sameShape(base)) {
        throw std::invalid_argument("keptFraction: shape " +
                                    sample.shapeString() + " vs " +
                                    base.shapeString());
    }
    size_t kept = 0, support = 0;
    for (size_t k = 0; k < base.size(); ++k) {
        if (base[k] == 0.0) continue;
        ++support;
        if (sample[k] == base[k]) ++kept;
    }
    if (support == 0) return 0.0;
    return static_cast<double>(kept) / static_cast<double>(support);
}

}  // namespace aclab
