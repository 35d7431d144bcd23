#pragma once

// Programs compiled once and rendered many times with different parameter
// records. A builder declares its open parameters on a ParamSet and returns a
// binder that turns resolved values into a generator; everything the builder
// computes from constant parameters is folded before the first render.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fusedsp/generator.hpp"

namespace fusedsp {

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Named scalar values supplied at render time.
class ParamRecord {
 public:
  ParamRecord() = default;
  ParamRecord(std::initializer_list<std::pair<const std::string, double>> init) : values_(init) {}

  void set(std::string name, double value) { values_[std::move(name)] = value; }
  /// Parses "name=value"; throws std::invalid_argument on malformed input.
  void set_assignment(std::string_view assignment);
  std::optional<double> get(const std::string& name) const;
  bool contains(const std::string& name) const { return values_.count(name) != 0; }
  const std::map<std::string, double>& values() const { return values_; }

  /// Fields of `overrides` replace fields of this record.
  ParamRecord merged(const ParamRecord& overrides) const;

 private:
  std::map<std::string, double> values_;
};

/// Resolved open-parameter values in schema order.
class ParamValues {
 public:
  explicit ParamValues(std::vector<double> values) : values_(std::move(values)) {}
  double operator[](std::size_t slot) const { return values_.at(slot); }
  std::size_t size() const { return values_.size(); }

 private:
  std::vector<double> values_;
};

/// Either a constant baked in at compile time or a value read from the record
/// when a render starts.
template <class T>
class ParamRef {
 public:
  static ParamRef constant(T value) {
    ParamRef r;
    r.value_ = std::move(value);
    return r;
  }

  static ParamRef open(std::function<T(const ParamValues&)> reader) {
    ParamRef r;
    r.reader_ = std::move(reader);
    return r;
  }

  bool is_constant() const { return !reader_; }

  const T& constant_value() const {
    if (!is_constant()) throw std::logic_error("ParamRef: open parameter has no constant value");
    return value_;
  }

  T operator()(const ParamValues& values) const { return reader_ ? reader_(values) : value_; }

  /// Derived parameter. On a constant `f` runs now, so the result is folded
  /// into the program; on an open parameter it runs once per render.
  template <class F>
  auto map(F f) const -> ParamRef<std::decay_t<decltype(f(std::declval<const T&>()))>> {
    using R = std::decay_t<decltype(f(std::declval<const T&>()))>;
    if (is_constant()) return ParamRef<R>::constant(f(value_));
    return ParamRef<R>::open([reader = reader_, f](const ParamValues& v) { return f(reader(v)); });
  }

 private:
  T value_{};
  std::function<T(const ParamValues&)> reader_;
};

template <class T>
ParamRef<T> const_param(T value) {
  return ParamRef<T>::constant(std::move(value));
}

template <class F, class A, class B>
auto combine(F f, const ParamRef<A>& a, const ParamRef<B>& b)
    -> ParamRef<std::decay_t<decltype(f(std::declval<const A&>(), std::declval<const B&>()))>> {
  using R = std::decay_t<decltype(f(std::declval<const A&>(), std::declval<const B&>()))>;
  if (a.is_constant() && b.is_constant()) return ParamRef<R>::constant(f(a.constant_value(), b.constant_value()));
  return ParamRef<R>::open([a, b, f](const ParamValues& v) { return f(a(v), b(v)); });
}

/// Open-parameter schema under construction.
class ParamSet {
 public:
  ParamRef<double> param(const std::string& name);
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
};

struct SchemaReport {
  std::vector<std::string> missing;
  std::vector<std::string> unknown;
  bool ok() const { return missing.empty() && unknown.empty(); }
};

/// A rendering procedure with its open-parameter schema. Immutable once
/// built; concurrent renders into distinct buffers need no coordination.
template <class E>
class CompiledProgram {
 public:
  using RenderFn = std::function<std::size_t(const ParamValues&, std::span<E>)>;
  using Sink = std::function<void(std::span<const E>)>;
  using StreamFn = std::function<std::size_t(const ParamValues&, std::size_t, std::span<E>, const Sink&)>;

  CompiledProgram(std::vector<std::string> schema, RenderFn fn, StreamFn stream, std::size_t lanes)
      : schema_(std::move(schema)), render_(std::move(fn)), stream_(std::move(stream)), lanes_(lanes) {}

  const std::vector<std::string>& schema() const { return schema_; }
  /// Samples per generator step; buffers are filled in whole blocks.
  std::size_t lanes() const { return lanes_; }

  SchemaReport check(const ParamRecord& record) const {
    SchemaReport report;
    for (const auto& name : schema_)
      if (!record.contains(name)) report.missing.push_back(name);
    for (const auto& [name, value] : record.values()) {
      (void)value;
      bool known = false;
      for (const auto& s : schema_) known = known || s == name;
      if (!known) report.unknown.push_back(name);
    }
    return report;
  }

  /// Throws SchemaError if a schema field is missing; unknown fields are
  /// ignored here and reported by check().
  ParamValues resolve(const ParamRecord& record) const {
    std::vector<double> values;
    values.reserve(schema_.size());
    for (const auto& name : schema_) {
      const auto v = record.get(name);
      if (!v) throw SchemaError("missing parameter '" + name + "'");
      values.push_back(*v);
    }
    return ParamValues(std::move(values));
  }

  std::size_t render_into(const ParamRecord& record, std::span<E> out) const {
    return render_(resolve(record), out);
  }

  SampleBuffer<E> render(const ParamRecord& record, std::size_t samples) const {
    const auto values = resolve(record);
    SampleBuffer<E> out;
    try {
      out.resize(samples);
    } catch (const std::bad_alloc&) {
      throw RenderError("render: cannot allocate " + std::to_string(samples) + " samples");
    } catch (const std::length_error&) {
      throw RenderError("render: " + std::to_string(samples) + " samples exceed the addressable size");
    }
    out.resize(render_(values, std::span<E>(out)));
    return out;
  }

  /// Renders `samples` samples through `chunk`, passing each filled prefix
  /// to `sink`; the program's state carries over between chunks. The chunk
  /// size must be a positive multiple of lanes(). Returns the samples produced.
  std::size_t render_stream(const ParamRecord& record, std::size_t samples, std::span<E> chunk,
                            const Sink& sink) const {
    if (chunk.empty() || chunk.size() % lanes_ != 0) {
      throw std::invalid_argument("render_stream: chunk size must be a positive multiple of " +
                                  std::to_string(lanes_));
    }
    return stream_(resolve(record), samples, chunk, sink);
  }

 private:
  std::vector<std::string> schema_;
  RenderFn render_;
  StreamFn stream_;
  std::size_t lanes_ = 1;
};

/// Runs `builder(ParamSet&)` exactly once. The builder returns a binder
/// `(const ParamValues&) -> generator` which is invoked at the start of each
/// render.
template <class Builder>
auto compile(Builder&& builder) {
  ParamSet set;
  auto bind = std::forward<Builder>(builder)(set);
  using G = std::invoke_result_t<decltype(bind)&, const ParamValues&>;
  using A = sample_t<G>;
  using E = element_t<A>;
  auto fn = [bind](const ParamValues& values, std::span<E> out) {
    const auto g = bind(values);
    return fusedsp::render_into(g, out);
  };
  auto stream = [bind](const ParamValues& values, std::size_t samples, std::span<E> chunk,
                       const typename CompiledProgram<E>::Sink& sink) {
    const auto g = bind(values);
    auto state = g.initial;
    std::size_t done = 0;
    while (done < samples) {
      const std::size_t n = std::min(chunk.size(), samples - done);
      const auto r = detail::drive(g, state, chunk.first(n));
      if (r.produced > 0) sink(std::span<const E>(chunk.data(), r.produced));
      done += r.produced;
      if (r.terminated) break;
    }
    return done;
  };
  return CompiledProgram<E>(set.names(), std::move(fn), std::move(stream), sample_traits<A>::width);
}

}  // namespace fusedsp
