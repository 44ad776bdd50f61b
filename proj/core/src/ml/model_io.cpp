#include <fstream>
#include <iterator>

#include "fpe/error.hpp"
#include "fpe/ml/model.hpp"

namespace fpe::ml {

namespace {

constexpr std::uint8_t kMagic[4] = {'F', 'P', 'M', '1'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

Bytes serialize_model(const TrainedModel& model) {
  Bytes out(std::begin(kMagic), std::end(kMagic));
  BlobWriter w(out);
  w.u32(kVersion);
  w.u8(static_cast<std::uint8_t>(model.algorithm()));
  w.u8(static_cast<std::uint8_t>(model.params().index()));
  const TrainingMeta& m = model.meta();
  w.u64(m.seed);
  w.u64(m.train_size);
  w.u64(m.iterations);
  w.f64(m.final_loss);
  std::visit(
      [&](const auto& p) {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, ConstantModel>) {
          w.u8(p.label);
        } else {
          p.write(w);
        }
      },
      model.params());
  return out;
}

TrainedModel deserialize_model(ByteView bytes) {
  if (bytes.size() < 4 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin()))
    throw Error(Errc::BadMagic, "not an FPM1 model file");
  BlobReader r(bytes.subspan(4));
  if (r.u32() != kVersion) throw Error(Errc::BadMagic, "unsupported model version");
  const std::uint8_t tag = r.u8();
  if (tag < 1 || tag > 6) throw Error(Errc::BadModel, "unknown algorithm tag");
  const auto algorithm = static_cast<Algorithm>(tag);
  const std::uint8_t kind = r.u8();
  TrainingMeta meta;
  meta.seed = r.u64();
  meta.train_size = r.u64();
  meta.iterations = r.u64();
  meta.final_loss = r.f64();

  TrainedModel::Params params;
  switch (kind) {
    case 0: {
      const std::uint8_t label = r.u8();
      if (label > 1) throw Error(Errc::BadModel, "constant label out of range");
      params = ConstantModel{label};
      break;
    }
    case 1: params = DecisionTree::read(r); break;
    case 2: params = RandomForest::read(r); break;
    case 3: params = KnnModel::read(r); break;
    case 4: params = LinearModel::read(r); break;
    case 5: params = MlpModel::read(r); break;
    default: throw Error(Errc::BadModel, "unknown parameter kind");
  }
  if (r.remaining() != 0) throw Error(Errc::BadModel, "trailing bytes after model");
  return {algorithm, std::move(params), meta};
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  const Bytes bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  const Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace fpe::ml
