/** Fixed-capacity append-only ring buffer for plot samples. */

export class RingBuffer<T> {
  private readonly items: T[];
  private start = 0;
  private count = 0;

  constructor(public readonly capacity: number) {
    if (!Number.isInteger(capacity) || capacity < 1) {
      throw new RangeError(`capacity must be a positive integer, got ${capacity}`);
    }
    this.items = new Array<T>(capacity);
  }

  get length(): number {
    return this.count;
  }

  /** Append one item, evicting the oldest when full. */
  push(item: T): void {
    const end = (this.start + this.count) % this.capacity;
    this.items[end] = item;
    if (this.count < this.capacity) {
      this.count += 1;
    } else {
      this.start = (this.start + 1) % this.capacity;
    }
  }

  at(i: number): T {
    if (i < 0 || i >= this.count) {
      throw new RangeError(`index ${i} out of range 0..${this.count - 1}`);
    }
    return this.items[(this.start + i) % this.capacity] as T;
  }

  last(): T | undefined {
    return this.count === 0 ? undefined : this.at(this.count - 1);
  }

  toArray(): T[] {
    const out: T[] = [];
    for (let i = 0; i < this.count; i += 1) {
      out.push(this.at(i));
    }
    return out;
  }

  clear(): void {
    this.start = 0;
    this.count = 0;
  }
}
