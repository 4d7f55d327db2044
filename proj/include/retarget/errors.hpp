#pragma once

#include <stdexcept>
#include <string>

namespace retarget {

/// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorClass { usage, data, numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), class_(cls) {}
  ErrorClass error_class() const noexcept { return class_; }

 private:
  ErrorClass class_;
};

#define RETARGET_DEFINE_ERROR(Name, Class)                                     \
  class Name : public Error {                                                  \
   public:                                                                     \
    explicit Name(const std::string& what) : Error(ErrorClass::Class, what) {} \
  };

RETARGET_DEFINE_ERROR(UsageError, usage)
RETARGET_DEFINE_ERROR(ParseError, data)
RETARGET_DEFINE_ERROR(GenerationError, data)
RETARGET_DEFINE_ERROR(SamplingExhausted, data)
RETARGET_DEFINE_ERROR(UnknownScene, data)
RETARGET_DEFINE_ERROR(ShapeMismatch, data)
RETARGET_DEFINE_ERROR(VariantMismatch, data)
RETARGET_DEFINE_ERROR(InsufficientPairs, data)
RETARGET_DEFINE_ERROR(NoFreeSpace, data)
RETARGET_DEFINE_ERROR(RangeError, data)
RETARGET_DEFINE_ERROR(EmptyInput, data)
RETARGET_DEFINE_ERROR(DegenerateGeometry, numeric)
RETARGET_DEFINE_ERROR(NonFiniteLoss, numeric)

#undef RETARGET_DEFINE_ERROR

/// A model trained under one FeatureConfig applied to features from another.
class FingerprintMismatch : public VariantMismatch {
 public:
  using VariantMismatch::VariantMismatch;
};

/// Scene invariant violation; carries the id of the offending object (or the
/// scene id when the floor itself is at fault).
class InvariantError : public Error {
 public:
  InvariantError(std::string object_id, const std::string& what)
      : Error(ErrorClass::data, what + " [" + object_id + "]"), object_id_(std::move(object_id)) {}
  const std::string& object_id() const noexcept { return object_id_; }

 private:
  std::string object_id_;
};

}  // namespace retarget
