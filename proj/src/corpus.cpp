#include "taxrewire/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "taxrewire/errors.hpp"
#include "taxrewire/random.hpp"
#include "taxrewire/text.hpp"

namespace taxrewire {

SparseVector::SparseVector(std::vector<Feature> entries)
{
    entries_.reserve(entries.size());
    FeatureIndex prev = 0;
    for (const auto& f : entries) {
        if (f.index == 0) throw DataError("feature indices must be positive");
        if (f.index <= prev)
            throw DataError("feature indices not strictly increasing (" + std::to_string(prev) + " then " +
                            std::to_string(f.index) + ")");
        prev = f.index;
        if (!std::isfinite(f.value)) throw DataError("non-finite feature value at index " + std::to_string(f.index));
        if (f.value != 0.0) entries_.push_back(f);
    }
}

double SparseVector::squared_norm() const
{
    double s = 0.0;
    for (const auto& f : entries_) s += f.value * f.value;
    return s;
}

double SparseVector::norm() const { return std::sqrt(squared_norm()); }

double SparseVector::dot(std::span<const double> dense) const
{
    double s = 0.0;
    for (const auto& f : entries_) {
        if (f.index >= dense.size()) break;
        s += f.value * dense[f.index];
    }
    return s;
}

double dot(const SparseVector& u, const SparseVector& v)
{
    const auto a = u.entries();
    const auto b = v.entries();
    double s = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].index < b[j].index)
            ++i;
        else if (b[j].index < a[i].index)
            ++j;
        else
            s += a[i++].value * b[j++].value;
    }
    return s;
}

void Dataset::add(Instance inst)
{
    dimensionality = std::max(dimensionality, inst.features.max_index());
    instances.push_back(std::move(inst));
}

Dataset parse_dataset(std::string_view text_in)
{
    Dataset d;
    const auto lines = text::split_lines(text_in);
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        auto line = lines[ln];
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = text::trim(line);
        if (line.empty()) continue;

        const auto tok = text::split_ws(line);
        std::uint64_t label = 0;
        if (!text::parse_u64(tok[0], label) || label > std::numeric_limits<NodeId>::max())
            throw ParseError(ln + 1, "invalid label \"" + std::string(tok[0]) + "\"");

        std::vector<Feature> feats;
        feats.reserve(tok.size() - 1);
        for (std::size_t k = 1; k < tok.size(); ++k) {
            const auto colon = tok[k].find(':');
            std::uint64_t idx = 0;
            double val = 0.0;
            if (colon == std::string_view::npos || !text::parse_u64(tok[k].substr(0, colon), idx) ||
                !text::parse_double(tok[k].substr(colon + 1), val))
                throw ParseError(ln + 1, "invalid feature token \"" + std::string(tok[k]) + "\"");
            if (idx == 0 || idx > std::numeric_limits<FeatureIndex>::max())
                throw ParseError(ln + 1, "feature index out of range in \"" + std::string(tok[k]) + "\"");
            if (!feats.empty() && idx <= feats.back().index)
                throw ParseError(ln + 1, "feature indices out of order at \"" + std::string(tok[k]) + "\"");
            feats.push_back({static_cast<FeatureIndex>(idx), val});
        }
        d.add({SparseVector(std::move(feats)), static_cast<NodeId>(label)});
    }
    if (d.empty()) throw ParseError(0, "dataset is empty");
    return d;
}

std::string serialize_dataset(const Dataset& d)
{
    std::string out;
    for (const auto& inst : d.instances) {
        out += std::to_string(inst.label);
        for (const auto& f : inst.features.entries()) {
            out += ' ';
            out += std::to_string(f.index);
            out += ':';
            out += text::format_double(f.value);
        }
        out += '\n';
    }
    return out;
}

std::vector<std::pair<NodeId, std::size_t>> label_histogram(const Dataset& d)
{
    std::map<NodeId, std::size_t> counts;
    for (const auto& inst : d.instances) ++counts[inst.label];
    return {counts.begin(), counts.end()};
}

TfidfModel TfidfModel::fit(const Dataset& d)
{
    std::vector<std::size_t> df(static_cast<std::size_t>(d.dimensionality) + 1, 0);
    for (const auto& inst : d.instances)
        for (const auto& f : inst.features.entries()) ++df[f.index];

    const auto n = static_cast<double>(d.size());
    std::vector<double> idf(df.size(), 0.0);
    for (std::size_t j = 1; j < df.size(); ++j)
        if (df[j] > 0) idf[j] = std::log(n / static_cast<double>(df[j]));
    return TfidfModel(std::move(idf), d.size());
}

SparseVector l2_normalize(const SparseVector& v)
{
    const double norm = v.norm();
    if (norm == 0.0) return v;
    std::vector<Feature> out(v.entries().begin(), v.entries().end());
    for (auto& f : out) f.value /= norm;
    return SparseVector(std::move(out));
}

SparseVector TfidfModel::transform(const SparseVector& tf) const
{
    std::vector<Feature> out;
    out.reserve(tf.nnz());
    for (const auto& f : tf.entries()) {
        if (f.index >= idf_.size()) break;
        const double w = f.value * idf_[f.index];
        if (w != 0.0) out.push_back({f.index, w});
    }
    return l2_normalize(SparseVector(std::move(out)));
}

Dataset TfidfModel::transform(const Dataset& d) const
{
    Dataset out;
    out.instances.reserve(d.size());
    for (const auto& inst : d.instances) out.add({transform(inst.features), inst.label});
    // Keep the declared dimensionality even if trailing features vanished.
    out.dimensionality = d.dimensionality;
    return out;
}

Dataset tfidf_normalize(const Dataset& d) { return TfidfModel::fit(d).transform(d); }

SplitIndices split_indices(std::size_t n, double ratio, std::uint64_t seed)
{
    if (!(ratio > 0.0 && ratio < 1.0)) throw DataError("split ratio must lie in (0, 1)");
    if (n < 2) throw DataError("need at least 2 instances to split");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    shuffle(order, rng);

    // The epsilon keeps e.g. 0.9 * 100 from rounding up to 91.
    const auto n_train = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n) - 1e-9));
    SplitIndices out;
    out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    return out;
}

std::pair<Dataset, Dataset> split_train_validation(const Dataset& d, double ratio, std::uint64_t seed)
{
    const auto idx = split_indices(d.size(), ratio, seed);
    Dataset train;
    Dataset validation;
    for (std::size_t i : idx.train) train.add(d.instances[i]);
    for (std::size_t i : idx.validation) validation.add(d.instances[i]);
    train.dimensionality = d.dimensionality;
    validation.dimensionality = d.dimensionality;
    return {std::move(train), std::move(validation)};
}

} // namespace taxrewire
