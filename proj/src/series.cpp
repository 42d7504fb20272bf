#include "wpm/series.hpp"

namespace wpm {

template class Series1<Cplx>;
template class Series1<Rational>;
template class Series2<Cplx>;
template class Series2<Rational>;

}  // namespace wpm
