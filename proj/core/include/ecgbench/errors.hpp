#pragma once

#include <stdexcept>
#include <string>

namespace ecgbench {

// Base class for every domain failure raised by the toolkit. Commands map
// these to exit code 1; anything else escaping to main is a bug.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define ECGBENCH_ERROR_TYPE(Name)          \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  }

ECGBENCH_ERROR_TYPE(ParseError);        // malformed text input
ECGBENCH_ERROR_TYPE(StructureError);    // internally inconsistent header/record
ECGBENCH_ERROR_TYPE(LengthError);       // payload or signal length violations
ECGBENCH_ERROR_TYPE(DataError);         // non-finite or otherwise unusable data
ECGBENCH_ERROR_TYPE(RangeError);        // value outside a representable range
ECGBENCH_ERROR_TYPE(LabelError);        // record with no usable class labels
ECGBENCH_ERROR_TYPE(SplitError);        // dataset too small or ratios invalid
ECGBENCH_ERROR_TYPE(BandError);         // filter band incompatible with fs
ECGBENCH_ERROR_TYPE(InsufficientPeaksError);
ECGBENCH_ERROR_TYPE(InsufficientDataError);
ECGBENCH_ERROR_TYPE(SpecError);         // unknown feature group / bad params
ECGBENCH_ERROR_TYPE(EmptyMatrixError);  // every feature column pruned
ECGBENCH_ERROR_TYPE(GroupingError);     // feature name matches no catalog group
ECGBENCH_ERROR_TYPE(ShapeError);        // tensor/layer shape mismatch
ECGBENCH_ERROR_TYPE(FormatError);       // corrupt or mismatched serialized blob
ECGBENCH_ERROR_TYPE(IndexError);        // class index out of range
ECGBENCH_ERROR_TYPE(ConfigError);       // invalid run or model configuration
ECGBENCH_ERROR_TYPE(SchemaError);       // feature columns do not match a model

#undef ECGBENCH_ERROR_TYPE

}  // namespace ecgbench
