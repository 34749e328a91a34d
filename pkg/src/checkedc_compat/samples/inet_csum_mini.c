/* Internet checksum over a byte buffer, as used by the IP stack. */
#include <stdint.h>

uint16_t inet_csum_slice(uint16_t sum, _Array_ptr<const uint8_t> buf : count(len), uint16_t len) _Checked {
  uint32_t csum = sum;
  uint16_t i = 0;
  while (i + 1 < len) {
    csum += (uint32_t)((buf[i] << 8) | buf[i + 1]);
    i += 2;
  }
  if (len & 1) {
    csum += (uint32_t)(buf[len - 1] << 8);
  }
  while (csum >> 16) {
    csum = (csum & 0xffff) + (csum >> 16);
  }
  return (uint16_t)csum;
}

uint16_t inet_csum_words(uint16_t sum, _Array_ptr<const uint16_t> words : count(n), uint16_t n) _Checked {
  uint32_t csum = sum;
  for (uint16_t k = 0; k < n; k++) {
    csum += words[k];
  }
  while (csum >> 16) {
    csum = (csum & 0xffff) + (csum >> 16);
  }
  return (uint16_t)csum;
}

int inet_csum_ok(_Array_ptr<const uint8_t> hdr : count(len), uint16_t len) _Checked {
  return inet_csum_slice(0, hdr, len) == 0xffff;
}
